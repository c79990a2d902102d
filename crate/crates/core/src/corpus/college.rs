use std::collections::{BTreeMap, BTreeSet};

use crate::decode::levenshtein::char_similarity;

use super::record::{College, EtdRecord};

pub const DEFAULT_THRESHOLD: f64 = 0.85;

pub type Roster = BTreeMap<College, Vec<String>>;

const ROSTER: &[(College, &[&str])] = &[
    (
        College::AgricultureLifeSciences,
        &[
            "Agricultural and Applied Economics",
            "Agricultural, Leadership, and Community Education",
            "Animal and Poultry Sciences",
            "Biochemistry",
            "Biological Systems Engineering",
            "Crop and Soil Environmental Sciences",
            "Dairy Science",
            "Entomology",
            "Food Science and Technology",
            "Horticulture",
            "Human Nutrition, Foods, and Exercise",
            "Plant Pathology, Physiology, and Weed Science",
            "School of Plant and Environmental Sciences",
        ],
    ),
    (
        College::ArchitectureArtsDesign,
        &[
            "Architecture",
            "School of Architecture",
            "Building Construction",
            "Landscape Architecture",
            "Urban Affairs and Planning",
            "School of Public and International Affairs",
            "Industrial Design",
            "School of Visual Arts",
            "Music",
            "Theatre and Cinema",
        ],
    ),
    (
        College::Engineering,
        &[
            "Aerospace and Ocean Engineering",
            "Biomedical Engineering and Mechanics",
            "Biological Systems Engineering",
            "Chemical Engineering",
            "Civil and Environmental Engineering",
            "Computer Science",
            "Electrical and Computer Engineering",
            "Engineering Education",
            "Engineering Science and Mechanics",
            "Industrial and Systems Engineering",
            "Materials Science and Engineering",
            "Mechanical Engineering",
            "Mining and Minerals Engineering",
        ],
    ),
    (
        College::LiberalArtsHumanSciences,
        &[
            "Apparel, Housing, and Resource Management",
            "Communication",
            "Educational Leadership and Policy Studies",
            "English",
            "Foreign Languages and Literatures",
            "History",
            "Human Development and Family Science",
            "Philosophy",
            "Political Science",
            "Religion and Culture",
            "Science, Technology, and Society",
            "Sociology",
            "Teaching and Learning",
            "School of Education",
        ],
    ),
    (
        College::NaturalResourcesEnvironment,
        &[
            "Fish and Wildlife Conservation",
            "Forest Resources and Environmental Conservation",
            "Geography",
            "Sustainable Biomaterials",
            "Wood Science and Forest Products",
        ],
    ),
    (
        College::Science,
        &[
            "Biological Sciences",
            "Chemistry",
            "Economics",
            "Geosciences",
            "Mathematics",
            "Physics",
            "Psychology",
            "Statistics",
            "School of Neuroscience",
        ],
    ),
    (
        College::Business,
        &[
            "Accounting and Information Systems",
            "Business Information Technology",
            "Business Administration",
            "Finance, Insurance, and Business Law",
            "Hospitality and Tourism Management",
            "Management",
            "Marketing",
        ],
    ),
    (
        College::VeterinaryMedicine,
        &[
            "Biomedical and Veterinary Sciences",
            "Biomedical Sciences and Pathobiology",
            "Large Animal Clinical Sciences",
            "Small Animal Clinical Sciences",
            "Population Health Sciences",
            "Veterinary Medicine",
        ],
    ),
];

/// Built-in department roster for the eight colleges.
pub fn default_roster() -> Roster {
    ROSTER
        .iter()
        .map(|(c, names)| (*c, names.iter().map(|n| n.to_string()).collect()))
        .collect()
}

const PREFIXES: &[&str] = &["the ", "department of ", "dept of ", "dept "];

/// Lowercases, maps `&` to "and", drops punctuation and collapses
/// whitespace, then strips "department of"-style wrappers.
pub fn normalize_department(name: &str) -> String {
    let lowered = name.to_lowercase().replace('&', " and ");
    let cleaned: String = lowered
        .chars()
        .map(|c| if c.is_alphanumeric() || c.is_whitespace() { c } else { ' ' })
        .collect();
    let mut s = cleaned.split_whitespace().collect::<Vec<_>>().join(" ");
    loop {
        let before = s.len();
        for p in PREFIXES {
            if let Some(rest) = s.strip_prefix(p) {
                s = rest.to_string();
            }
        }
        if let Some(rest) = s.strip_suffix(" department") {
            s = rest.to_string();
        }
        if s.len() == before {
            return s;
        }
    }
}

pub fn department_similarity(a: &str, b: &str) -> f64 {
    char_similarity(&normalize_department(a), &normalize_department(b))
}

/// Every roster college with a department at or above `threshold` similarity.
/// An empty set means the department is unassigned.
pub fn assign_college(department: &str, roster: &Roster, threshold: f64) -> BTreeSet<College> {
    let dept = normalize_department(department);
    if dept.is_empty() {
        return BTreeSet::new();
    }
    roster
        .iter()
        .filter(|(_, names)| {
            names
                .iter()
                .any(|n| char_similarity(&dept, &normalize_department(n)) >= threshold)
        })
        .map(|(c, _)| *c)
        .collect()
}

/// Assigns colleges to each record, duplicating records whose department
/// belongs to several colleges. Returns the assigned rows and the unassigned
/// originals.
pub fn assign_colleges(
    records: Vec<EtdRecord>,
    roster: &Roster,
    threshold: f64,
) -> (Vec<EtdRecord>, Vec<EtdRecord>) {
    let mut assigned = Vec::with_capacity(records.len());
    let mut unassigned = Vec::new();
    for record in records {
        let colleges = assign_college(&record.department, roster, threshold);
        if colleges.is_empty() {
            tracing::warn!(
                identifier = %record.identifier_uri,
                department = %record.department,
                "unassigned department"
            );
            unassigned.push(record);
            continue;
        }
        for c in colleges {
            let mut r = record.clone();
            r.college = Some(c);
            assigned.push(r);
        }
    }
    (assigned, unassigned)
}
