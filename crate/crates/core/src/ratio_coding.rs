//! Gas ratios and their interval codes for the Rogers and IEC methods.
//!
//! Rogers intervals follow the printed inequalities literally:
//!
//! | ratio      | code 5 | code 0      | code 1      | code 2 |
//! |------------|--------|-------------|-------------|--------|
//! | CH4/H2     | <= 0.1 | (0.1, 1)    | [1, 3)      | >= 3   |
//! | C2H6/CH4   |        | < 1         | >= 1        |        |
//! | C2H4/C2H6  |        | < 1         | [1, 3)      | >= 3   |
//! | C2H2/C2H4  |        | < 0.5       | [0.5, 3)    | >= 3   |
//!
//! IEC ratios share one band partition, `[0, 0.1)`, `[0.1, 1)`, `[1, 3]`,
//! `(3, inf)`, with per-ratio codes `C2H2/C2H4: 0 1 1 2`,
//! `CH4/H2: 1 0 2 2` and `C2H4/C2H6: 0 0 1 2`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas_model::{Concentration, Gas, GasSample};

/// Detection limit applied when none is configured.
pub const DEFAULT_FLOOR_PPM: f64 = 1.0;

/// Replaces every concentration below `floor` by `floor` and flags it as
/// below detection. Values at or above the floor pass through untouched.
pub fn clamp_sample(sample: &GasSample, floor: f64) -> Result<GasSample> {
    if !(floor.is_finite() && floor > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "detection floor must be a positive number, got {floor}"
        )));
    }
    let mut out = sample.clone();
    for gas in Gas::ALL {
        let c = out.gas_mut(gas);
        if c.ppm < floor {
            *c = Concentration::below(floor);
        }
    }
    Ok(out)
}

/// Which ratio method a code vector belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Rogers,
    Iec,
}

const ROGERS_ALPHABETS: [&[u8]; 4] = [&[5, 0, 1, 2], &[0, 1], &[0, 1, 2], &[0, 1, 2]];
const IEC_ALPHABETS: [&[u8]; 3] = [&[0, 1, 2], &[0, 1, 2], &[0, 1, 2]];

impl Scheme {
    pub fn arity(self) -> usize {
        match self {
            Scheme::Rogers => 4,
            Scheme::Iec => 3,
        }
    }

    /// Admissible codes at `position`.
    pub fn alphabet(self, position: usize) -> &'static [u8] {
        match self {
            Scheme::Rogers => ROGERS_ALPHABETS[position],
            Scheme::Iec => IEC_ALPHABETS[position],
        }
    }

    /// Every code vector of this scheme, in lexicographic alphabet order.
    pub fn all_vectors(self) -> Vec<CodeVector> {
        let mut out: Vec<Vec<u8>> = vec![Vec::new()];
        for pos in 0..self.arity() {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    self.alphabet(pos).iter().map(move |&c| {
                        let mut v = prefix.clone();
                        v.push(c);
                        v
                    })
                })
                .collect();
        }
        out.into_iter()
            .map(|codes| CodeVector { scheme: self, codes })
            .collect()
    }
}

/// Ordered integer ratio codes, validated against the scheme's alphabets.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeVector {
    scheme: Scheme,
    codes: Vec<u8>,
}

impl CodeVector {
    pub fn new(scheme: Scheme, codes: &[u8]) -> Result<Self> {
        if codes.len() != scheme.arity() {
            return Err(Error::Shape {
                context: "code vector",
                expected: scheme.arity(),
                found: codes.len(),
            });
        }
        for (pos, &c) in codes.iter().enumerate() {
            if !scheme.alphabet(pos).contains(&c) {
                return Err(Error::InvalidConfig(format!(
                    "code {c} is not admissible at position {} of a {scheme:?} vector",
                    pos + 1
                )));
            }
        }
        Ok(Self {
            scheme,
            codes: codes.to_vec(),
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn codes(&self) -> &[u8] {
        &self.codes
    }

    /// Codes as network inputs (raw values, no scaling).
    pub fn as_inputs(&self) -> Vec<f64> {
        self.codes.iter().map(|&c| f64::from(c)).collect()
    }
}

impl fmt::Display for CodeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.codes.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RogersRatios {
    pub methane_hydrogen: f64,
    pub ethane_methane: f64,
    pub ethylene_ethane: f64,
    pub acetylene_ethylene: f64,
}

impl RogersRatios {
    pub fn as_array(&self) -> [f64; 4] {
        [
            self.methane_hydrogen,
            self.ethane_methane,
            self.ethylene_ethane,
            self.acetylene_ethylene,
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IecRatios {
    pub acetylene_ethylene: f64,
    pub methane_hydrogen: f64,
    pub ethylene_ethane: f64,
}

impl IecRatios {
    pub fn as_array(&self) -> [f64; 3] {
        [self.acetylene_ethylene, self.methane_hydrogen, self.ethylene_ethane]
    }
}

fn quotient(sample: &GasSample, num: Gas, den: Gas, ratio: &'static str) -> Result<f64> {
    let d = sample.gas(den).ppm;
    if d == 0.0 {
        return Err(Error::DivisionByZero { ratio });
    }
    Ok(sample.gas(num).ppm / d)
}

/// CH4/H2, C2H6/CH4, C2H4/C2H6, C2H2/C2H4 of a clamped sample.
pub fn rogers_ratios(sample: &GasSample) -> Result<RogersRatios> {
    Ok(RogersRatios {
        methane_hydrogen: quotient(sample, Gas::Ch4, Gas::H2, "CH4/H2")?,
        ethane_methane: quotient(sample, Gas::C2h6, Gas::Ch4, "C2H6/CH4")?,
        ethylene_ethane: quotient(sample, Gas::C2h4, Gas::C2h6, "C2H4/C2H6")?,
        acetylene_ethylene: quotient(sample, Gas::C2h2, Gas::C2h4, "C2H2/C2H4")?,
    })
}

/// C2H2/C2H4, CH4/H2, C2H4/C2H6 of a clamped sample.
pub fn iec_ratios(sample: &GasSample) -> Result<IecRatios> {
    Ok(IecRatios {
        acetylene_ethylene: quotient(sample, Gas::C2h2, Gas::C2h4, "C2H2/C2H4")?,
        methane_hydrogen: quotient(sample, Gas::Ch4, Gas::H2, "CH4/H2")?,
        ethylene_ethane: quotient(sample, Gas::C2h4, Gas::C2h6, "C2H4/C2H6")?,
    })
}

/// Code of a single Rogers ratio at `position` (0-based).
pub fn rogers_code(position: usize, r: f64) -> u8 {
    match position {
        0 => {
            if r <= 0.1 {
                5
            } else if r < 1.0 {
                0
            } else if r < 3.0 {
                1
            } else {
                2
            }
        }
        1 => u8::from(r >= 1.0),
        2 => {
            if r < 1.0 {
                0
            } else if r < 3.0 {
                1
            } else {
                2
            }
        }
        3 => {
            if r < 0.5 {
                0
            } else if r < 3.0 {
                1
            } else {
                2
            }
        }
        _ => panic!("Rogers code position {position} out of range"),
    }
}

/// Band index of an IEC ratio: `[0,0.1)`, `[0.1,1)`, `[1,3]`, `(3,inf)`.
fn iec_band(r: f64) -> usize {
    if r < 0.1 {
        0
    } else if r < 1.0 {
        1
    } else if r <= 3.0 {
        2
    } else {
        3
    }
}

const IEC_BAND_CODES: [[u8; 4]; 3] = [[0, 1, 1, 2], [1, 0, 2, 2], [0, 0, 1, 2]];

/// Code of a single IEC ratio at `position` (0-based).
pub fn iec_code(position: usize, r: f64) -> u8 {
    IEC_BAND_CODES[position][iec_band(r)]
}

pub fn code_rogers(ratios: &RogersRatios) -> CodeVector {
    let codes: Vec<u8> = ratios
        .as_array()
        .iter()
        .enumerate()
        .map(|(pos, &r)| rogers_code(pos, r))
        .collect();
    CodeVector {
        scheme: Scheme::Rogers,
        codes,
    }
}

pub fn code_iec(ratios: &IecRatios) -> CodeVector {
    let codes: Vec<u8> = ratios
        .as_array()
        .iter()
        .enumerate()
        .map(|(pos, &r)| iec_code(pos, r))
        .collect();
    CodeVector {
        scheme: Scheme::Iec,
        codes,
    }
}
