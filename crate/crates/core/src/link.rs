//! Per-edge quantum state to classical occupation probabilities.
//!
//! Every edge of the network holds two copies of the pure state
//! `sqrt(l0)|00> + sqrt(1 - l0)|11>`. A single copy converts to a singlet with
//! probability `p = min(1, 2(1 - l0))`; the pair converts with `p2`, which
//! depends on whether the copies are converted one after the other or jointly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// How the two copies on an edge are turned into a singlet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Each copy independently: `p2 = 2p - p^2`.
    Sequential,
    /// Joint conversion of both copies: `p2 = min(1, 2p - p^2/2)`.
    Distilled,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Sequential => f.write_str("sequential"),
            Mode::Distilled => f.write_str("distilled"),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sequential" | "seq" => Ok(Mode::Sequential),
            "distilled" | "dist" | "distillation" => Ok(Mode::Distilled),
            other => Err(Error::InvalidParameter(format!(
                "unknown link mode {other:?} (expected sequential or distilled)"
            ))),
        }
    }
}

fn check_lambda0<T: Real>(lambda0: T) -> Result<()> {
    if lambda0.is_nan() || lambda0 < T::lit(0.5) || lambda0 > T::one() {
        return Err(Error::Domain(format!(
            "largest Schmidt coefficient must lie in [1/2, 1], got {lambda0}"
        )));
    }
    Ok(())
}

fn check_probability<T: Real>(name: &str, p: T) -> Result<()> {
    if p.is_nan() || p < T::zero() || p > T::one() {
        return Err(Error::Domain(format!("{name} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// Singlet conversion probability of one copy.
pub fn scp<T: Real>(lambda0: T) -> Result<T> {
    check_lambda0(lambda0)?;
    Ok((T::lit(2.0) * (T::one() - lambda0))
        .min(T::one())
        .clamp_unit())
}

/// Singlet conversion probability of the two copies held by one edge.
pub fn scp2<T: Real>(lambda0: T, mode: Mode) -> Result<T> {
    let p = scp(lambda0)?;
    Ok(scp2_from_p(p, mode))
}

/// `p2` as a function of the single-copy probability. `p` is assumed in `[0, 1]`.
#[inline]
pub fn scp2_from_p<T: Real>(p: T, mode: Mode) -> T {
    let two = T::lit(2.0);
    let v = match mode {
        Mode::Sequential => T::one() - (T::one() - p) * (T::one() - p),
        Mode::Distilled => (two * p - p * p / two).min(T::one()),
    };
    v.clamp_unit()
}

/// Inverse of [`scp`] on `[0, 1]`: the Schmidt coefficient giving single-copy probability `p`.
pub fn lambda_from_p<T: Real>(p: T) -> Result<T> {
    check_probability("p", p)?;
    Ok(T::one() - p / T::lit(2.0))
}

/// The state on every edge together with the conversion mode.
///
/// Public constructors take the single-copy probability `p`; the Schmidt
/// coefficient is derived.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkModel<T> {
    lambda0: T,
    mode: Mode,
}

impl<T: Real> LinkModel<T> {
    pub fn from_lambda0(lambda0: T, mode: Mode) -> Result<Self> {
        check_lambda0(lambda0)?;
        Ok(Self { lambda0, mode })
    }

    pub fn from_p(p: T, mode: Mode) -> Result<Self> {
        Ok(Self {
            lambda0: lambda_from_p(p)?,
            mode,
        })
    }

    pub fn lambda0(&self) -> T {
        self.lambda0
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Single-copy probability; carried by cycle links created by q-swaps.
    pub fn p(&self) -> T {
        (T::lit(2.0) * (T::one() - self.lambda0)).clamp_unit()
    }

    /// Two-copy probability; carried by original edges.
    pub fn p2(&self) -> T {
        scp2_from_p(self.p(), self.mode)
    }

    /// Same mode, different `p`.
    pub fn with_p(&self, p: T) -> Result<Self> {
        Self::from_p(p, self.mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn scp_examples() {
        assert_eq!(scp(0.5_f64).unwrap(), 1.0);
        assert_eq!(scp(1.0_f64).unwrap(), 0.0);
        assert_abs_diff_eq!(scp(0.8_f64).unwrap(), 0.4, epsilon = 1e-15);
    }

    #[test]
    fn scp2_examples() {
        assert_abs_diff_eq!(
            scp2(0.8_f64, Mode::Sequential).unwrap(),
            0.64,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            scp2(0.8_f64, Mode::Distilled).unwrap(),
            0.72,
            epsilon = 1e-15
        );
        assert_eq!(scp2(0.5_f64, Mode::Distilled).unwrap(), 1.0);
    }

    #[test]
    fn lambda_from_p_examples() {
        assert_eq!(lambda_from_p(1.0_f64).unwrap(), 0.5);
        assert_eq!(lambda_from_p(0.0_f64).unwrap(), 1.0);
        assert_abs_diff_eq!(lambda_from_p(0.4_f64).unwrap(), 0.8, epsilon = 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(scp(0.4_f64), Err(Error::Domain(_))));
        assert!(matches!(scp(1.1_f64), Err(Error::Domain(_))));
        assert!(matches!(scp(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(lambda_from_p(-0.1_f64), Err(Error::Domain(_))));
        assert!(matches!(
            LinkModel::from_p(1.5_f64, Mode::Distilled),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn distilled_matches_two_copy_schmidt_form_on_grid() {
        for i in 0..=1000 {
            let l0 = 0.5 + 0.5 * i as f64 / 1000.0;
            let via_p = scp2(l0, Mode::Distilled).unwrap();
            let direct = (2.0 * (1.0 - l0 * l0)).min(1.0);
            assert_abs_diff_eq!(via_p, direct, epsilon = 1e-14);
        }
    }

    #[test]
    fn f32_works() {
        let link = LinkModel::from_p(0.4_f32, Mode::Sequential).unwrap();
        assert!((link.p2() - 0.64).abs() < 1e-6);
    }

    #[test]
    fn mode_parses() {
        assert_eq!("Distilled".parse::<Mode>().unwrap(), Mode::Distilled);
        assert_eq!("seq".parse::<Mode>().unwrap(), Mode::Sequential);
        assert!("foo".parse::<Mode>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn distilled_dominates(l0 in 0.5f64..=1.0) {
                let p = scp(l0).unwrap();
                let d = scp2(l0, Mode::Distilled).unwrap();
                let s = scp2(l0, Mode::Sequential).unwrap();
                prop_assert!(d >= s);
                if p > 1e-9 && p < 1.0 - 1e-9 {
                    prop_assert!(d > s);
                }
                prop_assert!(s >= p && d >= p);
                prop_assert!((0.0..=1.0).contains(&d) && (0.0..=1.0).contains(&s));
            }

            #[test]
            fn monotone_in_lambda0(a in 0.5f64..=1.0, b in 0.5f64..=1.0) {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                prop_assert!(scp(lo).unwrap() >= scp(hi).unwrap());
                for mode in [Mode::Sequential, Mode::Distilled] {
                    prop_assert!(scp2(lo, mode).unwrap() >= scp2(hi, mode).unwrap());
                }
            }

            #[test]
            fn round_trip(p in 0.0f64..=1.0) {
                let back = scp(lambda_from_p(p).unwrap()).unwrap();
                prop_assert!((back - p).abs() < 1e-15);
            }
        }
    }
}
