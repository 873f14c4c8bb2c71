use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the ten transformation operators.
///
/// The letter mapping is fixed for every dataset this crate writes and is
/// recorded in each file header (see [`letter_map`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformId {
    NpPassive1,
    NpPassive2,
    NpPassive3,
    NpRaising1,
    NpRaising2,
    NpRaising3,
    Extraposition,
    IMovement,
    VMovement1,
    VMovement2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleCategory {
    Movement,
    Passive,
    Raising,
    Extraposition,
}

/// Documentation record for a rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleSpec {
    pub id: TransformId,
    pub category: RuleCategory,
    pub pattern: &'static str,
}

impl TransformId {
    /// All rules in letter order A..J.
    pub const ALL: [TransformId; 10] = [
        TransformId::NpPassive1,
        TransformId::NpPassive2,
        TransformId::NpPassive3,
        TransformId::NpRaising1,
        TransformId::NpRaising2,
        TransformId::NpRaising3,
        TransformId::Extraposition,
        TransformId::IMovement,
        TransformId::VMovement1,
        TransformId::VMovement2,
    ];

    pub fn letter(self) -> char {
        (b'A' + self.index() as u8) as char
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&t| t == self).expect("listed")
    }

    pub fn from_letter(c: char) -> Option<Self> {
        let i = (c.to_ascii_uppercase() as u8).checked_sub(b'A')? as usize;
        Self::ALL.get(i).copied()
    }

    /// Snake-case identifier used on the command line and in file names.
    pub fn name(self) -> &'static str {
        match self {
            TransformId::Extraposition => "extraposition",
            TransformId::IMovement => "i_movement",
            TransformId::NpPassive1 => "np_passive_1",
            TransformId::NpPassive2 => "np_passive_2",
            TransformId::NpPassive3 => "np_passive_3",
            TransformId::NpRaising1 => "np_raising_1",
            TransformId::NpRaising2 => "np_raising_2",
            TransformId::NpRaising3 => "np_raising_3",
            TransformId::VMovement1 => "v_movement_1",
            TransformId::VMovement2 => "v_movement_2",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            TransformId::Extraposition => "Extraposition",
            TransformId::IMovement => "I Movement",
            TransformId::NpPassive1 => "NP Passive 1",
            TransformId::NpPassive2 => "NP Passive 2",
            TransformId::NpPassive3 => "NP Passive 3",
            TransformId::NpRaising1 => "NP Raising 1",
            TransformId::NpRaising2 => "NP Raising 2",
            TransformId::NpRaising3 => "NP Raising 3",
            TransformId::VMovement1 => "V Movement 1",
            TransformId::VMovement2 => "V Movement 2",
        }
    }

    pub fn spec(self) -> RuleSpec {
        use RuleCategory::*;
        let (category, pattern) = match self {
            TransformId::Extraposition => (Extraposition, "[NP + PP][VP] → [NP][VP][PP]"),
            TransformId::IMovement => (Movement, "[NP][Aux/Modal][VP] → [Aux/Modal][NP][VP]?"),
            TransformId::NpPassive1 | TransformId::NpPassive3 => (
                Passive,
                "[NP subject][V][NP object] → [NP object][be + past participle][by NP subject]",
            ),
            TransformId::NpPassive2 => (Passive, "[V][NP][small clause] → [V][that/to clause]"),
            TransformId::NpRaising1 => (Raising, "[It][verb][that[NP VP]] → [NP][verb][to VP]"),
            TransformId::NpRaising2 => (Raising, "[NP][verb][to VP] → [It][verb][that[NP VP]]"),
            TransformId::NpRaising3 => (
                Raising,
                "[NP_1][verb][to NP_2][to VP] → [It][verb][to NP_2][that[NP_1 VP]]",
            ),
            TransformId::VMovement1 => (Movement, "[NP]; [VP infinitive] → [NP][VP finite]"),
            TransformId::VMovement2 => (Movement, "[NP]; [modal]; [VP] → [NP][modal VP]"),
        };
        RuleSpec { id: self, category, pattern }
    }
}

impl fmt::Display for TransformId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransformId {
    type Err = String;

    /// Accepts a snake-case name or a single letter.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let mut chars = s.chars();
        if let (Some(c), None) = (chars.next(), chars.next()) {
            return TransformId::from_letter(c).ok_or_else(|| format!("unknown rule letter `{s}`"));
        }
        TransformId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown rule `{s}`"))
    }
}

/// `(letter, name)` pairs in letter order, as written into dataset headers.
pub fn letter_map() -> Vec<(char, &'static str)> {
    TransformId::ALL.iter().map(|t| (t.letter(), t.name())).collect()
}

/// Joins labels the way prompts and file names spell a sequence: `A+H`.
pub fn join_letters(ids: &[TransformId]) -> String {
    ids.iter().map(|t| t.letter().to_string()).collect::<Vec<_>>().join("+")
}

/// Parses `A+H` (or `np_passive_1+i_movement`).
pub fn parse_sequence(s: &str) -> Result<Vec<TransformId>, String> {
    s.split('+').map(str::parse).collect()
}
