//! Comma-separated output tables. Each starts with a `#` line carrying the
//! library version and the config hash, followed by a one-line header.

use std::fmt::Write as _;

use agd_core::analysis::IterRecord;

pub const TRAJECTORY_HEADER: &str = "t,f_xbar,grad_sq,delta_bar,g_sq,theta,gamma,alpha,eta_t,G_sq";

pub fn stamp(hash: &str) -> String {
    format!("# agd {} config {hash}\n", agd_core::VERSION)
}

/// Shortest round-trip scientific form; `inf`/`NaN` as Rust prints them.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn trajectory(hash: &str, records: &[IterRecord]) -> String {
    let mut s = stamp(hash);
    s.push_str(TRAJECTORY_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.t,
            num(r.f_xbar),
            num(r.grad_sq),
            num(r.delta_bar),
            num(r.g_sq),
            num(r.theta),
            num(r.gamma),
            num(r.alpha),
            num(r.eta_t),
            num(r.g_sq_acc)
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 12345.678, 0.0] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(f64::INFINITY), "inf");
    }

    #[test]
    fn header_follows_stamp() {
        let t = trajectory("abc", &[]);
        let lines: Vec<&str> = t.lines().collect();
        assert!(lines[0].starts_with("# agd ") && lines[0].ends_with("config abc"));
        assert_eq!(lines[1], TRAJECTORY_HEADER);
    }
}
