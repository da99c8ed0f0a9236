use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of the bounded penalty `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaVariant {
    /// `clamp(t, 0, 1)`.
    #[default]
    Ramp,
    /// `3t^2 - 2t^3` on `(0, 1)`.
    Smoothstep,
}

impl ThetaVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            ThetaVariant::Ramp => "ramp",
            ThetaVariant::Smoothstep => "smoothstep",
        }
    }

    pub fn theta(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t >= 1.0 {
            1.0
        } else {
            match self {
                ThetaVariant::Ramp => t,
                ThetaVariant::Smoothstep => t * t * (3.0 - 2.0 * t),
            }
        }
    }

    pub fn theta_prime(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= 1.0 {
            0.0
        } else {
            match self {
                ThetaVariant::Ramp => 1.0,
                ThetaVariant::Smoothstep => 6.0 * t * (1.0 - t),
            }
        }
    }

    /// `int_0^t theta`.
    pub fn primitive(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let (head, tail) = if t >= 1.0 { (1.0, t - 1.0) } else { (t, 0.0) };
        let part = match self {
            ThetaVariant::Ramp => 0.5 * head * head,
            ThetaVariant::Smoothstep => head * head * head * (1.0 - 0.5 * head),
        };
        part + tail
    }

    /// `sup_{t > 0} (1 - theta(t)) t`.
    pub fn c_theta(&self) -> f64 {
        match self {
            ThetaVariant::Ramp => 0.25,
            ThetaVariant::Smoothstep => {
                // (1 - theta(t)) t is unimodal on (0, 1); golden-section search
                let g = |t: f64| (1.0 - self.theta(t)) * t;
                let r = 0.5 * (5f64.sqrt() - 1.0);
                let (mut a, mut b) = (0.0, 1.0);
                for _ in 0..200 {
                    let c = b - r * (b - a);
                    let d = a + r * (b - a);
                    if g(c) > g(d) {
                        b = d;
                    } else {
                        a = c;
                    }
                }
                g(0.5 * (a + b))
            }
        }
    }
}

impl fmt::Display for ThetaVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ThetaVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ramp" => Ok(ThetaVariant::Ramp),
            "smoothstep" => Ok(ThetaVariant::Smoothstep),
            _ => Err(Error::config(
                "solver.theta_variant",
                format!("unknown theta variant `{s}`"),
            )),
        }
    }
}

/// `theta_eps(t) = theta(t / eps)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyFn {
    pub variant: ThetaVariant,
    pub eps: f64,
    pub c_theta: f64,
}

impl PenaltyFn {
    pub fn new(eps: f64, variant: ThetaVariant) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::config("penalty.eps", format!("eps must be positive, got {eps}")));
        }
        Ok(PenaltyFn {
            variant,
            eps,
            c_theta: variant.c_theta(),
        })
    }

    pub fn ramp(eps: f64) -> Result<Self> {
        Self::new(eps, ThetaVariant::Ramp)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.variant.theta(t / self.eps)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.variant.theta_prime(t / self.eps) / self.eps
    }

    /// `int_0^t theta_eps`.
    pub fn primitive(&self, t: f64) -> f64 {
        self.eps * self.variant.primitive(t / self.eps)
    }
}
