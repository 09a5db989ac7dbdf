//! Soft Dice, binary cross-entropy and their weighted sum.
//!
//! The compound objective is `alpha * (1 - soft_dice) + bce`; minimizing it
//! increases overlap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, Mask};

/// Probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` before logs.
pub const PROB_CLAMP: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub alpha: f64,
    pub epsilon: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            alpha: 10.0,
            epsilon: 1e-5,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alpha > 0.0 && self.epsilon > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "alpha and epsilon must be > 0, got {self:?}"
            )))
        }
    }
}

/// A loss value with its gradient with respect to every probability.
#[derive(Clone, Debug, PartialEq)]
pub struct LossValue {
    pub value: f64,
    pub grad: Grid<f64>,
}

fn indicator(g: bool) -> f64 {
    if g {
        1.0
    } else {
        0.0
    }
}

/// `1 - (2 Σ p g + eps) / (Σ p + Σ g + eps)`.
pub fn soft_dice_loss(p: &Grid<f64>, g: &Mask, cfg: &LossConfig) -> Result<LossValue> {
    p.same_shape(g)?;
    cfg.validate()?;
    let eps = cfg.epsilon;
    let (mut inter, mut sum_p, mut sum_g) = (0.0, 0.0, 0.0);
    for (&pi, &gi) in p.data().iter().zip(g.data()) {
        let gi = indicator(gi);
        inter += pi * gi;
        sum_p += pi;
        sum_g += gi;
    }
    let num = 2.0 * inter + eps;
    let den = sum_p + sum_g + eps;
    // d/dp_i of -num/den = -(2 g_i den - num) / den^2
    let den_sq = den * den;
    let grad = Grid::from_vec(
        p.shape(),
        g.data()
            .iter()
            .map(|&gi| -(2.0 * indicator(gi) * den - num) / den_sq)
            .collect(),
    )?;
    Ok(LossValue {
        value: 1.0 - num / den,
        grad,
    })
}

/// Mean binary cross-entropy over all voxels.
pub fn bce_loss(p: &Grid<f64>, g: &Mask) -> Result<LossValue> {
    p.same_shape(g)?;
    let n = p.len() as f64;
    let mut total = 0.0;
    let mut grad = Vec::with_capacity(p.len());
    for (&pi, &gi) in p.data().iter().zip(g.data()) {
        let c = pi.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        let clamped = c != pi;
        if gi {
            total -= c.ln();
            grad.push(if clamped { 0.0 } else { -1.0 / (c * n) });
        } else {
            total -= (1.0 - c).ln();
            grad.push(if clamped { 0.0 } else { 1.0 / ((1.0 - c) * n) });
        }
    }
    Ok(LossValue {
        value: total / n,
        grad: Grid::from_vec(p.shape(), grad)?,
    })
}

/// `alpha * soft_dice_loss + bce_loss`.
pub fn compound_loss(p: &Grid<f64>, g: &Mask, cfg: &LossConfig) -> Result<LossValue> {
    let dice = soft_dice_loss(p, g, cfg)?;
    let ce = bce_loss(p, g)?;
    let grad = dice
        .grad
        .data()
        .iter()
        .zip(ce.grad.data())
        .map(|(&d, &c)| cfg.alpha * d + c)
        .collect();
    Ok(LossValue {
        value: cfg.alpha * dice.value + ce.value,
        grad: Grid::from_vec(p.shape(), grad)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_case(seed: u64, side: usize) -> (Grid<f64>, Mask) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = Grid::from_fn([side; 3], |_| rng.gen_range(0.05..0.95));
        let g = Grid::from_fn([side; 3], |_| rng.gen_bool(0.3));
        (p, g)
    }

    fn check_grad(f: impl Fn(&Grid<f64>) -> LossValue, p: &Grid<f64>) {
        let h = 1e-4;
        let analytic = f(p).grad;
        for i in (0..p.len()).step_by(7) {
            let mut plus = p.clone();
            plus.data_mut()[i] += h;
            let mut minus = p.clone();
            minus.data_mut()[i] -= h;
            let fd = (f(&plus).value - f(&minus).value) / (2.0 * h);
            let a = analytic.data()[i];
            assert!(
                (fd - a).abs() <= 1e-4 * a.abs().max(fd.abs()).max(1e-12),
                "{i}: {fd} vs {a}"
            );
        }
    }

    #[test]
    fn dice_loss_anchors() {
        let cfg = LossConfig::default();
        let g = Grid::from_fn([4, 4, 4], |[z, _, _]| z < 2);
        let p = g.map(|&b| indicator(b));
        let l = soft_dice_loss(&p, &g, &cfg).unwrap();
        assert!(l.value.abs() < 1e-5);
        let zeros = Grid::filled([4, 4, 4], 0.0);
        let none = Grid::filled([4, 4, 4], false);
        assert_eq!(soft_dice_loss(&zeros, &none, &cfg).unwrap().value, 0.0);
    }

    #[test]
    fn bce_anchors() {
        let g = Grid::from_fn([3, 3, 3], |[_, y, _]| y == 1);
        let p = g.map(|&b| indicator(b));
        let l = bce_loss(&p, &g).unwrap();
        assert!((l.value - -(1.0 - PROB_CLAMP).ln()).abs() < 1e-15);
        let half = Grid::filled([3, 3, 3], 0.5);
        assert!((bce_loss(&half, &g).unwrap().value - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let cfg = LossConfig::default();
        let (p, g) = random_case(11, 6);
        check_grad(|p| soft_dice_loss(p, &g, &cfg).unwrap(), &p);
        check_grad(|p| bce_loss(p, &g).unwrap(), &p);
        check_grad(|p| compound_loss(p, &g, &cfg).unwrap(), &p);
    }

    #[test]
    fn compound_is_additive() {
        let cfg = LossConfig::default();
        let (p, g) = random_case(5, 4);
        let d = soft_dice_loss(&p, &g, &cfg).unwrap();
        let c = bce_loss(&p, &g).unwrap();
        let t = compound_loss(&p, &g, &cfg).unwrap();
        assert!((t.value - (10.0 * d.value + c.value)).abs() < 1e-12);
        for i in 0..p.len() {
            assert_eq!(t.grad.data()[i], 10.0 * d.grad.data()[i] + c.grad.data()[i]);
        }
    }

    #[test]
    fn rejects_bad_config_and_shapes() {
        let (p, g) = random_case(1, 3);
        let bad = LossConfig {
            alpha: 0.0,
            epsilon: 1e-5,
        };
        assert!(soft_dice_loss(&p, &g, &bad).is_err());
        let other = Grid::filled([3, 3, 2], false);
        assert!(bce_loss(&p, &other).is_err());
    }
}
