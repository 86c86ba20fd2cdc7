use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FailureReason {
    NoAnchor,
    HookFailed,
    NoLandingSite,
    Stalled,
    Timeout,
    NoPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MissionState {
    TandemNavigate,
    CliffConfirmed,
    UavCrossCliff,
    AnchorSearch,
    WindTether,
    LandingSearch,
    Landed,
    WinchClimb,
    Done,
    Failed(FailureReason),
}

impl MissionState {
    pub fn is_terminal(self) -> bool {
        matches!(self, MissionState::Done | MissionState::Failed(_))
    }

    /// Whether `self -> to` is an edge of the mission graph. Any live state
    /// may fail.
    pub fn can_transition(self, to: MissionState) -> bool {
        use MissionState::*;
        if self.is_terminal() {
            return false;
        }
        if matches!(to, Failed(_)) {
            return true;
        }
        matches!(
            (self, to),
            (TandemNavigate, CliffConfirmed)
                | (TandemNavigate, Done)
                | (CliffConfirmed, UavCrossCliff)
                | (UavCrossCliff, AnchorSearch)
                | (AnchorSearch, WindTether)
                | (WindTether, LandingSearch)
                | (LandingSearch, Landed)
                | (Landed, WinchClimb)
                | (WinchClimb, Done)
        )
    }
}

impl fmt::Display for MissionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MissionState::Failed(r) => write!(f, "Failed({r:?})"),
            s => write!(f, "{s:?}"),
        }
    }
}
