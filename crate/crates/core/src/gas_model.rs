//! Domain types shared across the crate: gas samples, the Rogers and IEC
//! fault taxonomies, and per-method diagnoses.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The seven dissolved gases carried by a sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gas {
    H2,
    Ch4,
    C2h2,
    C2h4,
    C2h6,
    Co,
    Co2,
}

impl Gas {
    /// All gases in CSV column order.
    pub const ALL: [Gas; 7] = [
        Gas::H2,
        Gas::Ch4,
        Gas::C2h2,
        Gas::C2h4,
        Gas::C2h6,
        Gas::Co,
        Gas::Co2,
    ];

    /// The five gases that enter a Rogers or IEC ratio.
    pub const RATIO_GASES: [Gas; 5] = [Gas::H2, Gas::Ch4, Gas::C2h2, Gas::C2h4, Gas::C2h6];

    /// Lower-case column name used in CSV headers and CLI flags.
    pub fn column(self) -> &'static str {
        match self {
            Gas::H2 => "h2",
            Gas::Ch4 => "ch4",
            Gas::C2h2 => "c2h2",
            Gas::C2h4 => "c2h4",
            Gas::C2h6 => "c2h6",
            Gas::Co => "co",
            Gas::Co2 => "co2",
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            Gas::H2 => "H2",
            Gas::Ch4 => "CH4",
            Gas::C2h2 => "C2H2",
            Gas::C2h4 => "C2H4",
            Gas::C2h6 => "C2H6",
            Gas::Co => "CO",
            Gas::Co2 => "CO2",
        }
    }
}

impl fmt::Display for Gas {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.formula())
    }
}

/// One measured concentration in ppm.
///
/// When `below_detection` is set, `ppm` holds the detection limit the
/// reading was reported against (a `<1` entry is stored as `1.0`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    pub ppm: f64,
    pub below_detection: bool,
}

impl Concentration {
    pub fn measured(ppm: f64) -> Self {
        Self {
            ppm,
            below_detection: false,
        }
    }

    pub fn below(limit: f64) -> Self {
        Self {
            ppm: limit,
            below_detection: true,
        }
    }
}

impl fmt::Display for Concentration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.below_detection {
            write!(f, "<{}", self.ppm)
        } else {
            write!(f, "{}", self.ppm)
        }
    }
}

/// One oil-chromatography reading.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GasSample {
    pub id: String,
    pub date: Option<NaiveDate>,
    pub h2: Concentration,
    pub ch4: Concentration,
    pub c2h2: Concentration,
    pub c2h4: Concentration,
    pub c2h6: Concentration,
    pub co: Concentration,
    pub co2: Concentration,
    /// Ground-truth label, when known.
    pub actual_fault: Option<CoarseFault>,
}

impl GasSample {
    /// Builds a sample from the five ratio gases, with CO and CO2 unset
    /// (recorded as below a 1 ppm detection limit).
    pub fn from_ratio_gases(id: impl Into<String>, h2: f64, ch4: f64, c2h2: f64, c2h4: f64, c2h6: f64) -> Self {
        Self {
            id: id.into(),
            date: None,
            h2: Concentration::measured(h2),
            ch4: Concentration::measured(ch4),
            c2h2: Concentration::measured(c2h2),
            c2h4: Concentration::measured(c2h4),
            c2h6: Concentration::measured(c2h6),
            co: Concentration::below(1.0),
            co2: Concentration::below(1.0),
            actual_fault: None,
        }
    }

    pub fn gas(&self, gas: Gas) -> Concentration {
        match gas {
            Gas::H2 => self.h2,
            Gas::Ch4 => self.ch4,
            Gas::C2h2 => self.c2h2,
            Gas::C2h4 => self.c2h4,
            Gas::C2h6 => self.c2h6,
            Gas::Co => self.co,
            Gas::Co2 => self.co2,
        }
    }

    pub fn gas_mut(&mut self, gas: Gas) -> &mut Concentration {
        match gas {
            Gas::H2 => &mut self.h2,
            Gas::Ch4 => &mut self.ch4,
            Gas::C2h2 => &mut self.c2h2,
            Gas::C2h4 => &mut self.c2h4,
            Gas::C2h6 => &mut self.c2h6,
            Gas::Co => &mut self.co,
            Gas::Co2 => &mut self.co2,
        }
    }

    /// Checks the sample invariants: non-empty id, finite non-negative
    /// concentrations.
    pub fn validate(&self) -> Result<(), Error> {
        if self.id.trim().is_empty() {
            return Err(Error::InvalidSample("empty sample id".into()));
        }
        for gas in Gas::ALL {
            let c = self.gas(gas);
            if !c.ppm.is_finite() || c.ppm < 0.0 {
                return Err(Error::InvalidSample(format!(
                    "sample {}: {} concentration {} is not a non-negative number",
                    self.id, gas, c.ppm
                )));
            }
        }
        Ok(())
    }
}

/// The scoring vocabulary shared by every method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CoarseFault {
    #[serde(rename = "N")]
    Normal,
    #[serde(rename = "PD")]
    Pd,
    #[serde(rename = "ARC")]
    Arc,
    #[serde(rename = "OH")]
    Oh,
    #[serde(rename = "ND")]
    NoDecision,
}

impl CoarseFault {
    /// Short label as used in sample CSV files (`N`, `PD`, `ARC`, `OH`).
    pub fn label(self) -> &'static str {
        match self {
            CoarseFault::Normal => "N",
            CoarseFault::Pd => "PD",
            CoarseFault::Arc => "ARC",
            CoarseFault::Oh => "OH",
            CoarseFault::NoDecision => "ND",
        }
    }
}

impl fmt::Display for CoarseFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoarseFault::Normal => "Normal",
            CoarseFault::Pd => "PD",
            CoarseFault::Arc => "ARC",
            CoarseFault::Oh => "OH",
            CoarseFault::NoDecision => "No decision",
        })
    }
}

impl FromStr for CoarseFault {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "n" | "normal" => Ok(CoarseFault::Normal),
            "pd" => Ok(CoarseFault::Pd),
            "arc" => Ok(CoarseFault::Arc),
            "oh" => Ok(CoarseFault::Oh),
            "nd" | "no decision" | "nodecision" => Ok(CoarseFault::NoDecision),
            other => Err(Error::InvalidConfig(format!("unknown fault label `{other}`"))),
        }
    }
}

/// Fault classes of the Rogers diagnosis table, numbered 1 to 12.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RogersFault {
    Normal = 1,
    PartialDischargeLowEnergy = 2,
    OverheatingBelow150 = 3,
    Overheating150To200 = 4,
    Overheating200To300 = 5,
    ConductorOverheating = 6,
    WindingCirculatingCurrent = 7,
    CoreTankCirculatingCurrent = 8,
    ArcingLowEnergy = 9,
    ArcingHighEnergy = 10,
    ContinuousSparking = 11,
    PartialDischargeHighEnergy = 12,
}

impl RogersFault {
    pub const ALL: [RogersFault; 12] = [
        RogersFault::Normal,
        RogersFault::PartialDischargeLowEnergy,
        RogersFault::OverheatingBelow150,
        RogersFault::Overheating150To200,
        RogersFault::Overheating200To300,
        RogersFault::ConductorOverheating,
        RogersFault::WindingCirculatingCurrent,
        RogersFault::CoreTankCirculatingCurrent,
        RogersFault::ArcingLowEnergy,
        RogersFault::ArcingHighEnergy,
        RogersFault::ContinuousSparking,
        RogersFault::PartialDischargeHighEnergy,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        index.checked_sub(1).and_then(|i| Self::ALL.get(i).copied())
    }

    pub fn description(self) -> &'static str {
        match self {
            RogersFault::Normal => "Normal",
            RogersFault::PartialDischargeLowEnergy => "Partial discharge of low energy",
            RogersFault::OverheatingBelow150 => "Overheating < 150 °C",
            RogersFault::Overheating150To200 => "Overheating 150-200 °C",
            RogersFault::Overheating200To300 => "Overheating 200-300 °C",
            RogersFault::ConductorOverheating => "Conductor overheating",
            RogersFault::WindingCirculatingCurrent => "Overheating by winding circulating current",
            RogersFault::CoreTankCirculatingCurrent => "Overheating by core and tank circulating current",
            RogersFault::ArcingLowEnergy => "Arcing of low energy",
            RogersFault::ArcingHighEnergy => "Arcing of high energy",
            RogersFault::ContinuousSparking => "Continuous sparking to floating potential",
            RogersFault::PartialDischargeHighEnergy => "Partial discharge with high energy",
        }
    }

    /// Projection onto the scoring vocabulary.
    pub fn coarse(self) -> CoarseFault {
        coarse_of_rogers(self)
    }
}

/// Fault classes of the IEC diagnosis table, numbered 1 to 9.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IecFault {
    NoFault = 1,
    PartialDischargeLowDensity = 2,
    PartialDischargeHighDensity = 3,
    DischargeLowEnergy = 4,
    DischargeHighEnergy = 5,
    OverheatingBelow150 = 6,
    Overheating150To300 = 7,
    Overheating300To700 = 8,
    OverheatingAbove700 = 9,
}

impl IecFault {
    pub const ALL: [IecFault; 9] = [
        IecFault::NoFault,
        IecFault::PartialDischargeLowDensity,
        IecFault::PartialDischargeHighDensity,
        IecFault::DischargeLowEnergy,
        IecFault::DischargeHighEnergy,
        IecFault::OverheatingBelow150,
        IecFault::Overheating150To300,
        IecFault::Overheating300To700,
        IecFault::OverheatingAbove700,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        index.checked_sub(1).and_then(|i| Self::ALL.get(i).copied())
    }

    pub fn description(self) -> &'static str {
        match self {
            IecFault::NoFault => "No fault",
            IecFault::PartialDischargeLowDensity => "Partial discharge with low energy density",
            IecFault::PartialDischargeHighDensity => "Partial discharge with high energy density",
            IecFault::DischargeLowEnergy => "Discharge of low energy",
            IecFault::DischargeHighEnergy => "Discharge of high energy",
            IecFault::OverheatingBelow150 => "Overheating T < 150 °C",
            IecFault::Overheating150To300 => "Overheating 150 < T < 300 °C",
            IecFault::Overheating300To700 => "Overheating 300 <= T <= 700 °C",
            IecFault::OverheatingAbove700 => "Overheating T >= 700 °C",
        }
    }

    pub fn coarse(self) -> CoarseFault {
        coarse_of_iec(self)
    }
}

/// Normal maps to Normal; both partial-discharge classes to PD; every
/// thermal class to OH; arcing and sparking to ARC.
pub fn coarse_of_rogers(fault: RogersFault) -> CoarseFault {
    use RogersFault::*;
    match fault {
        Normal => CoarseFault::Normal,
        PartialDischargeLowEnergy | PartialDischargeHighEnergy => CoarseFault::Pd,
        OverheatingBelow150
        | Overheating150To200
        | Overheating200To300
        | ConductorOverheating
        | WindingCirculatingCurrent
        | CoreTankCirculatingCurrent => CoarseFault::Oh,
        ArcingLowEnergy | ArcingHighEnergy | ContinuousSparking => CoarseFault::Arc,
    }
}

/// No fault maps to Normal; partial discharges to PD; low/high energy
/// discharges to ARC; the four thermal bands to OH.
pub fn coarse_of_iec(fault: IecFault) -> CoarseFault {
    use IecFault::*;
    match fault {
        NoFault => CoarseFault::Normal,
        PartialDischargeLowDensity | PartialDischargeHighDensity => CoarseFault::Pd,
        DischargeLowEnergy | DischargeHighEnergy => CoarseFault::Arc,
        OverheatingBelow150 | Overheating150To300 | Overheating300To700 | OverheatingAbove700 => CoarseFault::Oh,
    }
}

/// A fine-grained fault from either taxonomy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "table", content = "class")]
pub enum FineFault {
    Rogers(RogersFault),
    Iec(IecFault),
}

impl FineFault {
    pub fn coarse(self) -> CoarseFault {
        match self {
            FineFault::Rogers(f) => f.coarse(),
            FineFault::Iec(f) => f.coarse(),
        }
    }

    /// One-based row/class number within its table.
    pub fn index(self) -> usize {
        match self {
            FineFault::Rogers(f) => f.index(),
            FineFault::Iec(f) => f.index(),
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            FineFault::Rogers(f) => f.description(),
            FineFault::Iec(f) => f.description(),
        }
    }
}

impl fmt::Display for FineFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.description())
    }
}

/// The four diagnosis methods.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    RogersTable,
    IecTable,
    AnnRogers,
    AnnIec,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::IecTable, Method::RogersTable, Method::AnnIec, Method::AnnRogers];

    pub fn is_ann(self) -> bool {
        matches!(self, Method::AnnRogers | Method::AnnIec)
    }

    /// CLI token.
    pub fn token(self) -> &'static str {
        match self {
            Method::RogersTable => "rogers",
            Method::IecTable => "iec",
            Method::AnnRogers => "ann-rogers",
            Method::AnnIec => "ann-iec",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::RogersTable => "Rogers",
            Method::IecTable => "IEC",
            Method::AnnRogers => "ANN-Rogers",
            Method::AnnIec => "ANN-IEC",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rogers" => Ok(Method::RogersTable),
            "iec" => Ok(Method::IecTable),
            "ann-rogers" => Ok(Method::AnnRogers),
            "ann-iec" => Ok(Method::AnnIec),
            other => Err(Error::InvalidConfig(format!("unknown method `{other}`"))),
        }
    }
}

/// Outcome of one method on one sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "fault")]
pub enum Verdict {
    Fault(FineFault),
    NoDecision,
}

/// A method's diagnosis of one sample.
///
/// Constructed only through [`Diagnosis::table_hit`], [`Diagnosis::no_decision`]
/// and [`Diagnosis::network`], which keep `coarse` consistent with `result`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnosis {
    pub method: Method,
    pub result: Verdict,
    pub coarse: CoarseFault,
    pub confidence: f64,
    pub low_confidence: bool,
    pub ambiguous: bool,
}

impl Diagnosis {
    pub fn table_hit(method: Method, fault: FineFault, ambiguous: bool) -> Self {
        Self {
            method,
            result: Verdict::Fault(fault),
            coarse: fault.coarse(),
            confidence: 1.0,
            low_confidence: false,
            ambiguous,
        }
    }

    pub fn no_decision(method: Method) -> Self {
        Self {
            method,
            result: Verdict::NoDecision,
            coarse: CoarseFault::NoDecision,
            confidence: 0.0,
            low_confidence: false,
            ambiguous: false,
        }
    }

    pub fn network(method: Method, fault: FineFault, confidence: f64, low_confidence: bool) -> Self {
        debug_assert!(method.is_ann());
        Self {
            method,
            result: Verdict::Fault(fault),
            coarse: fault.coarse(),
            confidence: confidence.clamp(0.0, 1.0),
            low_confidence,
            ambiguous: false,
        }
    }

    pub fn fault(&self) -> Option<FineFault> {
        match self.result {
            Verdict::Fault(f) => Some(f),
            Verdict::NoDecision => None,
        }
    }

    pub fn is_no_decision(&self) -> bool {
        matches!(self.result, Verdict::NoDecision)
    }
}
