use std::fmt;

use serde::{Deserialize, Serialize};

/// Five-way position assessment, ordered from Black's best to Red's best.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SituationLabel5 {
    ClearAdvBlack,
    SlightAdvBlack,
    Balanced,
    SlightAdvRed,
    ClearAdvRed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SituationLabel3 {
    AdvBlack,
    Balanced,
    AdvRed,
}

impl SituationLabel5 {
    pub const ALL: [SituationLabel5; 5] = [
        SituationLabel5::ClearAdvBlack,
        SituationLabel5::SlightAdvBlack,
        SituationLabel5::Balanced,
        SituationLabel5::SlightAdvRed,
        SituationLabel5::ClearAdvRed,
    ];

    pub fn coarsen(self) -> SituationLabel3 {
        coarsen_to_3class(self)
    }

    /// The same assessment seen from the other side.
    pub fn mirror(self) -> SituationLabel5 {
        match self {
            SituationLabel5::ClearAdvBlack => SituationLabel5::ClearAdvRed,
            SituationLabel5::SlightAdvBlack => SituationLabel5::SlightAdvRed,
            SituationLabel5::Balanced => SituationLabel5::Balanced,
            SituationLabel5::SlightAdvRed => SituationLabel5::SlightAdvBlack,
            SituationLabel5::ClearAdvRed => SituationLabel5::ClearAdvBlack,
        }
    }

    /// Wording used in prompts and answers.
    pub fn phrase(self) -> &'static str {
        match self {
            SituationLabel5::ClearAdvBlack => "significant advantage for Black",
            SituationLabel5::SlightAdvBlack => "slight advantage for Black",
            SituationLabel5::Balanced => "balanced",
            SituationLabel5::SlightAdvRed => "slight advantage for Red",
            SituationLabel5::ClearAdvRed => "significant advantage for Red",
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            SituationLabel5::ClearAdvBlack => "clear_adv_black",
            SituationLabel5::SlightAdvBlack => "slight_adv_black",
            SituationLabel5::Balanced => "balanced",
            SituationLabel5::SlightAdvRed => "slight_adv_red",
            SituationLabel5::ClearAdvRed => "clear_adv_red",
        }
    }
}

impl SituationLabel3 {
    pub const ALL: [SituationLabel3; 3] = [SituationLabel3::AdvBlack, SituationLabel3::Balanced, SituationLabel3::AdvRed];

    pub fn code(self) -> &'static str {
        match self {
            SituationLabel3::AdvBlack => "adv_black",
            SituationLabel3::Balanced => "balanced",
            SituationLabel3::AdvRed => "adv_red",
        }
    }
}

impl fmt::Display for SituationLabel5 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl fmt::Display for SituationLabel3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Balanced when `|value| <= sigma_s`, clear when `|value| >= sigma_l`,
/// slight in between; the sign picks the side.
pub fn classify_situation(value: i32, sigma_s: i32, sigma_l: i32) -> SituationLabel5 {
    let magnitude = (value as i64).abs();
    let red = value > 0;
    if magnitude <= sigma_s as i64 {
        SituationLabel5::Balanced
    } else if magnitude < sigma_l as i64 {
        if red {
            SituationLabel5::SlightAdvRed
        } else {
            SituationLabel5::SlightAdvBlack
        }
    } else if red {
        SituationLabel5::ClearAdvRed
    } else {
        SituationLabel5::ClearAdvBlack
    }
}

pub fn coarsen_to_3class(label: SituationLabel5) -> SituationLabel3 {
    match label {
        SituationLabel5::ClearAdvBlack | SituationLabel5::SlightAdvBlack => SituationLabel3::AdvBlack,
        SituationLabel5::Balanced => SituationLabel3::Balanced,
        SituationLabel5::SlightAdvRed | SituationLabel5::ClearAdvRed => SituationLabel3::AdvRed,
    }
}
