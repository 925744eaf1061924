//! Two-point construction behind the minimax lower bound.
//!
//! `rho_y` puts mass `p = v^(-1/e) y^((1+e)/e)` on the atom
//! `a = v^(1/e) Delta^(-1/e)` and the rest on zero, so its mean is
//! `y^((1+e)/e) Delta^(-1/e)` and its raw `(1+e)`-moment is
//! `v (y/Delta)^((1+e)/e)`. In every epoch the best arm uses
//! `y = 2^(e/(1+e)) Delta` (mean `2 Delta`) and the others `y = Delta`
//! (mean `Delta`).

use super::distributions::ArmDistribution;
use super::instance::InstanceSpec;
use crate::error::{Error, Result};
use crate::estimators::HeavyTailParams;

/// `rho_y` for gap parameter `delta`.
pub fn rho(y: f64, delta: f64, ht: &HeavyTailParams) -> Result<ArmDistribution> {
    let e = ht.epsilon;
    let p = ht.v.powf(-1.0 / e) * y.powf((1.0 + e) / e);
    if !(0.0..=1.0).contains(&p) || !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rho_y needs 0 <= p <= 1 and delta > 0, got p = {p}, delta = {delta}"
        )));
    }
    let atom = ht.v.powf(1.0 / e) * delta.powf(-1.0 / e);
    Ok(ArmDistribution::TwoPoint { mass_at_zero: 1.0 - p, atom })
}

/// `Delta = v^(1/(1+e)) (2 ln 2 K epochs / (16 T))^(e/(1+e))`.
pub fn lower_bound_gap(k: usize, epochs: usize, horizon: u64, ht: &HeavyTailParams) -> f64 {
    let q = ht.order();
    let x = 2.0 * std::f64::consts::LN_2 * (k * epochs) as f64 / (16.0 * horizon as f64);
    ht.scale() * x.powf(ht.epsilon / q)
}

/// Instance with `epochs` equal-length epochs (the last absorbs the
/// remainder). The best arm of epoch `j` is `j mod k`.
pub fn lower_bound_instance(k: usize, epochs: usize, horizon: u64, ht: HeavyTailParams) -> Result<InstanceSpec> {
    if k < 2 || epochs == 0 || (epochs as u64) > horizon {
        return Err(Error::InvalidParameter(format!(
            "need k >= 2 and 1 <= epochs <= horizon, got k = {k}, epochs = {epochs}, horizon = {horizon}"
        )));
    }
    let delta = lower_bound_gap(k, epochs, horizon, &ht);
    let low = rho(delta, delta, &ht)?;
    let high = rho(2f64.powf(ht.epsilon / ht.order()) * delta, delta, &ht)?;
    let len = horizon / epochs as u64;
    let breakpoints: Vec<u64> = (1..epochs as u64).map(|j| j * len).collect();
    let arms = (0..epochs)
        .map(|j| (0..k).map(|i| if i == j % k { high } else { low }).collect())
        .collect();
    InstanceSpec::new(k, horizon, breakpoints, arms, ht)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two-atom brute force for `E|X - EX|^q`.
    fn brute(d: &ArmDistribution, q: f64) -> f64 {
        let ArmDistribution::TwoPoint { mass_at_zero, atom } = *d else { unreachable!() };
        let atoms = [(0.0, mass_at_zero), (atom, 1.0 - mass_at_zero)];
        let mean: f64 = atoms.iter().map(|(x, w)| x * w).sum();
        atoms.iter().map(|(x, w)| w * (x - mean).abs().powf(q)).sum()
    }

    #[test]
    fn means_and_gap() {
        for &(k, ep, t, e, v) in &[(3, 4, 1000, 1.0, 1.0), (5, 2, 5000, 0.5, 2.0), (2, 1, 200, 0.3, 0.7)] {
            let ht = HeavyTailParams::new(e, v).unwrap();
            let s = lower_bound_instance(k, ep, t, ht).unwrap();
            let delta = lower_bound_gap(k, ep, t, &ht);
            for (j, row) in s.means().iter().enumerate() {
                for (i, &m) in row.iter().enumerate() {
                    let expect = if i == j % k { 2.0 * delta } else { delta };
                    assert!((m - expect).abs() <= 1e-12 * expect, "{m} vs {expect}");
                }
            }
            assert_eq!(s.epoch_count(), ep);
        }
    }

    #[test]
    fn raw_moment_equals_v_at_y_equal_delta() {
        let ht = HeavyTailParams::new(0.5, 1.0).unwrap();
        let d = rho(0.5, 0.5, &ht).unwrap();
        let ArmDistribution::TwoPoint { mass_at_zero, atom } = d else { unreachable!() };
        let raw = (1.0 - mass_at_zero) * atom.powf(1.5);
        assert!((raw - 1.0).abs() < 1e-12);
    }

    #[test]
    fn centered_moment_at_y_equal_delta() {
        // p = 0.5^3, atom = 0.5^-2; the centered moment exceeds v = 1 here
        let ht = HeavyTailParams::new(0.5, 1.0).unwrap();
        let d = rho(0.5, 0.5, &ht).unwrap();
        let exact = brute(&d, 1.5);
        assert!((d.centered_moment(1.5).unwrap() - exact).abs() < 1e-12);
        assert!((exact - 1.127_84).abs() < 1e-4, "{exact}");
    }

    #[test]
    fn centered_moment_within_v_for_eps_one() {
        let ht = HeavyTailParams::new(1.0, 2.0).unwrap();
        for i in 1..=20 {
            let delta = 0.05 * i as f64;
            for s in 0..=10 {
                let y = delta * s as f64 / 10.0;
                let d = rho(y, delta, &ht).unwrap();
                assert!(brute(&d, 2.0) <= 2.0 + 1e-12);
            }
        }
    }
}
