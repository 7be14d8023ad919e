//! Two-strategy symmetric games parametrized by the cost-benefit ratio r.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Strategy {
    Cooperate = 0,
    Defect = 1,
}

impl Strategy {
    /// Stable integer code: C = 0, D = 1.
    #[inline]
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Strategy::Cooperate),
            1 => Some(Strategy::Defect),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameKind {
    PrisonersDilemma,
    Snowdrift,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GameParams {
    pub kind: GameKind,
    pub r: f64,
}

impl GameParams {
    pub fn matrix(&self) -> Result<PayoffMatrix> {
        match self.kind {
            GameKind::PrisonersDilemma => pd_matrix(self.r),
            GameKind::Snowdrift => sd_matrix(self.r),
        }
    }
}

/// Payoffs to the focal player: R for (C,C), S for (C,D), T for (D,C), P for (D,D).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PayoffMatrix {
    pub reward: f64,
    pub sucker: f64,
    pub temptation: f64,
    pub punishment: f64,
}

impl PayoffMatrix {
    #[inline]
    pub fn payoff(&self, focal: Strategy, opponent: Strategy) -> f64 {
        match (focal, opponent) {
            (Strategy::Cooperate, Strategy::Cooperate) => self.reward,
            (Strategy::Cooperate, Strategy::Defect) => self.sucker,
            (Strategy::Defect, Strategy::Cooperate) => self.temptation,
            (Strategy::Defect, Strategy::Defect) => self.punishment,
        }
    }

    /// Table indexed by `[focal code][opponent code]`.
    #[inline]
    pub(crate) fn table(&self) -> [[f64; 2]; 2] {
        [[self.reward, self.sucker], [self.temptation, self.punishment]]
    }

    /// T > R > P > S and 2R > T + S.
    pub fn is_prisoners_dilemma(&self) -> bool {
        self.temptation > self.reward
            && self.reward > self.punishment
            && self.punishment > self.sucker
            && 2.0 * self.reward > self.temptation + self.sucker
    }

    /// T > R > S > P.
    pub fn is_snowdrift(&self) -> bool {
        self.temptation > self.reward && self.reward > self.sucker && self.sucker > self.punishment
    }
}

pub fn payoff(m: &PayoffMatrix, focal: Strategy, opponent: Strategy) -> f64 {
    m.payoff(focal, opponent)
}

fn check_r(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "cost-benefit ratio r must lie strictly inside (0, 1), got {r}"
        )))
    }
}

/// Prisoner's dilemma: R = 1, S = -r, T = 1 + r, P = 0.
pub fn pd_matrix(r: f64) -> Result<PayoffMatrix> {
    check_r(r)?;
    Ok(PayoffMatrix {
        reward: 1.0,
        sucker: -r,
        temptation: 1.0 + r,
        punishment: 0.0,
    })
}

/// Snowdrift: R = 1, S = 1 - r, T = 1 + r, P = 0.
pub fn sd_matrix(r: f64) -> Result<PayoffMatrix> {
    check_r(r)?;
    Ok(PayoffMatrix {
        reward: 1.0,
        sucker: 1.0 - r,
        temptation: 1.0 + r,
        punishment: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Strategy;
    use proptest::prelude::*;
    use Strategy::*;

    #[test]
    fn pd_values() {
        let m = pd_matrix(0.5).unwrap();
        assert_eq!((m.reward, m.sucker, m.temptation, m.punishment), (1.0, -0.5, 1.5, 0.0));
        let m = pd_matrix(0.25).unwrap();
        assert_eq!(m.temptation + m.sucker, 1.0);
    }

    #[test]
    fn pd_rejects_boundary() {
        for r in [0.0, 1.0, -0.1, 1.2, f64::NAN] {
            assert!(matches!(pd_matrix(r), Err(Error::InvalidParameter(_))), "r = {r}");
            assert!(sd_matrix(r).is_err());
        }
    }

    #[test]
    fn sd_values() {
        let m = sd_matrix(0.5).unwrap();
        assert_eq!((m.reward, m.sucker, m.temptation, m.punishment), (1.0, 0.5, 1.5, 0.0));
        assert!(m.is_snowdrift());
        let m = sd_matrix(0.999).unwrap();
        assert!(m.sucker > m.punishment);
        assert!(m.is_snowdrift());
        let m = sd_matrix(0.2).unwrap();
        assert!(((m.temptation + m.sucker) / 2.0 - m.reward).abs() < 1e-15);
    }

    #[test]
    fn payoff_lookup() {
        let m = pd_matrix(0.1).unwrap();
        assert_eq!(payoff(&m, Cooperate, Defect), -0.1);
        assert_eq!(payoff(&m, Defect, Defect), m.punishment);
        assert_eq!(payoff(&m, Cooperate, Defect) + payoff(&m, Defect, Cooperate), 1.0);
        let t = m.table();
        for s in [Cooperate, Defect] {
            for o in [Cooperate, Defect] {
                assert_eq!(t[s.code() as usize][o.code() as usize], m.payoff(s, o));
            }
        }
    }

    #[test]
    fn strategy_codes_are_stable() {
        assert_eq!(Cooperate.code(), 0);
        assert_eq!(Defect.code(), 1);
        assert_eq!(Strategy::from_code(1), Some(Defect));
        assert_eq!(Strategy::from_code(2), None);
    }

    proptest! {
        #[test]
        fn pd_ranking_holds(r in 1e-9f64..0.999_999_999) {
            prop_assert!(pd_matrix(r).unwrap().is_prisoners_dilemma());
        }

        #[test]
        fn sd_ranking_holds(r in 1e-9f64..0.999_999_999) {
            prop_assert!(sd_matrix(r).unwrap().is_snowdrift());
        }
    }
}
