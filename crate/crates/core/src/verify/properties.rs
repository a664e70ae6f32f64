use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneReport {
    pub pass: bool,
    /// `(v, β(v))` with `β(v) > v`.
    pub overbid: Option<(f64, f64)>,
    /// `(v, v′, β(v), β(v′))` with `v < v′` and `β(v) > β(v′)`.
    pub decrease: Option<(f64, f64, f64, f64)>,
}

/// Samples `samples` equally spaced values in `[0,1]` (at least 2) and checks
/// `β(v) ≤ v` and that `β` never decreases.
pub fn monotone_no_overbid_check(strategy: &dyn Fn(f64) -> f64, samples: usize) -> MonotoneReport {
    let k = samples.max(2);
    let mut overbid = None;
    let mut decrease = None;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..k {
        let v = i as f64 / (k - 1) as f64;
        let b = strategy(v);
        if overbid.is_none() && b > v {
            overbid = Some((v, b));
        }
        if let Some((pv, pb)) = prev {
            if decrease.is_none() && b < pb {
                decrease = Some((pv, v, pb, b));
            }
        }
        prev = Some((v, b));
    }
    MonotoneReport { pass: overbid.is_none() && decrease.is_none(), overbid, decrease }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_passes() {
        assert!(monotone_no_overbid_check(&|v| v, 10_000).pass);
    }

    #[test]
    fn overbid_witness() {
        let rep = monotone_no_overbid_check(&|v| v + 0.1, 10_000);
        assert!(!rep.pass);
        assert_eq!(rep.overbid, Some((0.0, 0.1)));
    }

    #[test]
    fn decreasing_step_witness() {
        let rep = monotone_no_overbid_check(&|v| if v < 0.5 { v / 2.0 } else { 0.0 }, 101);
        assert!(!rep.pass);
        assert!(rep.overbid.is_none());
        let (v1, v2, _, b2) = rep.decrease.unwrap();
        assert!(v1 < 0.5 && v2 >= 0.5 && b2 == 0.0);
    }
}
