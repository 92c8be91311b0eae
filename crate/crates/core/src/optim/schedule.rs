use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScheduleKind {
    Fixed,
    Decay,
    /// Decay for the first `s_th` epochs, then frozen at the value reached.
    Hybrid,
}

impl std::str::FromStr for ScheduleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(Self::Fixed),
            "decay" => Ok(Self::Decay),
            "hybrid" => Ok(Self::Hybrid),
            other => Err(Error::Config(format!("unknown schedule '{other}'"))),
        }
    }
}

impl std::fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Fixed => "fixed",
            Self::Decay => "decay",
            Self::Hybrid => "hybrid",
        })
    }
}

/// Step-size rule `α(k)` over the global inner-iteration counter `k`.
///
/// Decay: `α(k) = α₀ / (1 + α₀ λ ⌊k/m_s⌋)`. Hybrid follows the decay law up
/// to epoch `s_th` and keeps the value it has at the switch,
/// `α₀ / (1 + α₀ λ s_th)`, afterwards.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleSpec {
    pub kind: ScheduleKind,
    pub alpha0: f64,
    pub lambda: f64,
    pub s_th: usize,
}

impl ScheduleSpec {
    pub fn fixed(alpha0: f64) -> Self {
        Self {
            kind: ScheduleKind::Fixed,
            alpha0,
            lambda: 0.0,
            s_th: 5,
        }
    }

    pub fn decay(alpha0: f64, lambda: f64) -> Self {
        Self {
            kind: ScheduleKind::Decay,
            alpha0,
            lambda,
            s_th: 5,
        }
    }

    pub fn hybrid(alpha0: f64, lambda: f64, s_th: usize) -> Self {
        Self {
            kind: ScheduleKind::Hybrid,
            alpha0,
            lambda,
            s_th,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha0.is_finite() && self.alpha0 > 0.0) {
            return Err(Error::Config(format!("alpha0 must be positive, got {}", self.alpha0)));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::Config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.kind == ScheduleKind::Hybrid && self.s_th == 0 {
            return Err(Error::Config("hybrid schedule needs s_th >= 1".into()));
        }
        Ok(())
    }

    pub fn step_size(&self, k: u64, m_s: usize) -> f64 {
        let epoch = k / m_s.max(1) as u64;
        let decayed = |e: u64| self.alpha0 / (1.0 + self.alpha0 * self.lambda * e as f64);
        match self.kind {
            ScheduleKind::Fixed => self.alpha0,
            ScheduleKind::Decay => decayed(epoch),
            ScheduleKind::Hybrid => decayed(epoch.min(self.s_th as u64)),
        }
    }
}
