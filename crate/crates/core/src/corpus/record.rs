use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The eight colleges a record can be assigned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum College {
    #[serde(rename = "ALS")]
    AgricultureLifeSciences,
    #[serde(rename = "AAD")]
    ArchitectureArtsDesign,
    #[serde(rename = "ENG")]
    Engineering,
    #[serde(rename = "LAHS")]
    LiberalArtsHumanSciences,
    #[serde(rename = "NRE")]
    NaturalResourcesEnvironment,
    #[serde(rename = "SCI")]
    Science,
    #[serde(rename = "BUS")]
    Business,
    #[serde(rename = "VM")]
    VeterinaryMedicine,
}

impl College {
    pub const ALL: [College; 8] = [
        College::AgricultureLifeSciences,
        College::ArchitectureArtsDesign,
        College::Engineering,
        College::LiberalArtsHumanSciences,
        College::NaturalResourcesEnvironment,
        College::Science,
        College::Business,
        College::VeterinaryMedicine,
    ];

    pub fn code(self) -> &'static str {
        match self {
            College::AgricultureLifeSciences => "ALS",
            College::ArchitectureArtsDesign => "AAD",
            College::Engineering => "ENG",
            College::LiberalArtsHumanSciences => "LAHS",
            College::NaturalResourcesEnvironment => "NRE",
            College::Science => "SCI",
            College::Business => "BUS",
            College::VeterinaryMedicine => "VM",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            College::AgricultureLifeSciences => "Agriculture and Life Sciences",
            College::ArchitectureArtsDesign => "Architecture, Arts, and Design",
            College::Engineering => "Engineering",
            College::LiberalArtsHumanSciences => "Liberal Arts and Human Sciences",
            College::NaturalResourcesEnvironment => "Natural Resources and Environment",
            College::Science => "Science",
            College::Business => "Business",
            College::VeterinaryMedicine => "Veterinary Medicine",
        }
    }
}

impl fmt::Display for College {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for College {
    type Err = String;

    /// Accepts either the short code or the full name, case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        College::ALL
            .into_iter()
            .find(|c| c.code().eq_ignore_ascii_case(s) || c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown college {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DegreeLevel {
    Doctoral,
    Masters,
}

impl DegreeLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            DegreeLevel::Doctoral => "doctoral",
            DegreeLevel::Masters => "masters",
        }
    }
}

impl FromStr for DegreeLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_alphabetic())
            .collect::<String>()
            .to_lowercase();
        match norm.as_str() {
            "doctoral" | "doctorate" | "phd" => Ok(DegreeLevel::Doctoral),
            "masters" | "master" => Ok(DegreeLevel::Masters),
            _ => Err(format!("unknown degree level {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EtdType {
    Thesis,
    Dissertation,
}

impl EtdType {
    pub fn as_str(self) -> &'static str {
        match self {
            EtdType::Thesis => "thesis",
            EtdType::Dissertation => "dissertation",
        }
    }
}

impl FromStr for EtdType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "thesis" => Ok(EtdType::Thesis),
            "dissertation" => Ok(EtdType::Dissertation),
            _ => Err(format!("unknown document type {s:?}")),
        }
    }
}

/// One thesis or dissertation with its abstract pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtdRecord {
    pub identifier_uri: String,
    pub title: String,
    /// Academic abstract (model source).
    pub abstract_text: String,
    /// General-audience abstract (model target).
    pub abstract_general: String,
    pub subject_terms: Vec<String>,
    pub discipline: String,
    pub department: String,
    pub degree: String,
    pub degree_level: DegreeLevel,
    pub etd_type: EtdType,
    pub college: Option<College>,
}
