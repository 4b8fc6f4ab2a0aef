//! CSV tables. Numbers use 12 significant digits in scientific notation,
//! rows end in LF, and row order is fixed by the caller.

use alpha2_dynamo::dirac::RegularityRow;
use alpha2_dynamo::perturbation::SlopeRow;
use alpha2_dynamo::SweepRowF64;

pub const SWEEP_HEADER: &str = "l,x0,lambda,epsilon,branch,localized,residual";
pub const REDUCED_HEADER: &str = "l,x0,lambda";
pub const PERTURB_HEADER: &str = "delta,epsilon_pencil,epsilon_linear,deviation";
pub const DIRAC_HEADER: &str = "l,x0,nodes,regular,residual";

pub fn num(v: f64) -> String {
    // Collapse −0 so sign noise never changes the bytes.
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.11e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn sweep_csv(rows: &[SweepRowF64]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let line = match &r.solution {
            Some(s) => format!(
                "{},{},{},{},{},{},{}",
                r.l,
                num(r.x0),
                num(s.lambda),
                num(s.epsilon),
                s.branch,
                s.localized,
                num(s.diagnostics.pencil_residual)
            ),
            None => format!("{},{},,,,false,", r.l, num(r.x0)),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn reduced_csv(rows: &[(usize, f64, Option<f64>)]) -> String {
    let mut out = String::from(REDUCED_HEADER);
    out.push('\n');
    for &(l, x0, lambda) in rows {
        out.push_str(&format!("{l},{},{}\n", num(x0), opt(lambda)));
    }
    out
}

pub fn perturb_csv(rows: &[SlopeRow<f64>]) -> String {
    let mut out = String::from(PERTURB_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            num(r.delta),
            opt(r.epsilon_pencil),
            num(r.epsilon_linear),
            opt(r.deviation)
        ));
    }
    out
}

pub fn dirac_csv(l: usize, rows: &[RegularityRow<f64>]) -> String {
    let mut out = String::from(DIRAC_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{l},{},{},{},{}\n", num(r.x0), r.nodes, r.regular, opt(r.residual)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(0.5), "5.00000000000e-1");
        assert_eq!(num(-0.0), "0.00000000000e0");
        assert_eq!(num(1234.5), "1.23450000000e3");
    }

    #[test]
    fn empty_sweep_row() {
        let rows = vec![SweepRowF64 { l: 1, x0: 0.1, solution: None, roots: vec![] }];
        let csv = sweep_csv(&rows);
        assert_eq!(csv, format!("{SWEEP_HEADER}\n1,1.00000000000e-1,,,,false,\n"));
    }

    #[test]
    fn reduced_rows() {
        let csv = reduced_csv(&[(0, 0.0, None), (0, 1.0, Some(0.58))]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], "0,0.00000000000e0,");
        assert_eq!(lines[2], "0,1.00000000000e0,5.80000000000e-1");
    }
}
