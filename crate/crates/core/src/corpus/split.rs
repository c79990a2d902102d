use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::record::{College, EtdRecord};
use super::CorpusError;

pub const DEFAULT_RATIO: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSplit {
    pub train: Vec<EtdRecord>,
    pub test: Vec<EtdRecord>,
    pub seed: u64,
    pub ratio: f64,
}

/// Stratified random split by college.
///
/// Rows sharing an identifier (one thesis listed under two colleges) always
/// land on the same side, so the sides stay disjoint by identifier. A college
/// with fewer than two rows goes entirely to train.
pub fn split(records: Vec<EtdRecord>, ratio: f64, seed: u64) -> Result<CorpusSplit, CorpusError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(CorpusError::Config(format!("split ratio must be in (0,1), got {ratio}")));
    }
    let mut groups: BTreeMap<Option<College>, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        groups.entry(r.college).or_default().push(i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut side: HashMap<&str, bool> = HashMap::new();
    for (college, idx) in &groups {
        let n = idx.len();
        if n < 2 {
            tracing::warn!(college = ?college, rows = n, "college too small to split, all rows go to train");
            for &i in idx {
                side.entry(records[i].identifier_uri.as_str()).or_insert(true);
            }
            continue;
        }
        let target = (ratio * n as f64).round() as usize;
        let mut already_train = 0;
        let mut free = Vec::new();
        for &i in idx {
            match side.get(records[i].identifier_uri.as_str()) {
                Some(true) => already_train += 1,
                Some(false) => {}
                None => free.push(i),
            }
        }
        free.shuffle(&mut rng);
        let need = target.saturating_sub(already_train).min(free.len());
        for (k, &i) in free.iter().enumerate() {
            // A duplicate identifier inside one group keeps its first decision.
            side.entry(records[i].identifier_uri.as_str()).or_insert(k < need);
        }
    }

    let flags: Vec<bool> = records.iter().map(|r| side[r.identifier_uri.as_str()]).collect();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (r, is_train) in records.into_iter().zip(flags) {
        if is_train {
            train.push(r);
        } else {
            test.push(r);
        }
    }
    Ok(CorpusSplit { train, test, seed, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::record::{DegreeLevel, EtdType};
    use std::collections::HashSet;

    fn rec(id: &str, college: Option<College>) -> EtdRecord {
        EtdRecord {
            identifier_uri: id.into(),
            title: String::new(),
            abstract_text: "a".into(),
            abstract_general: "b".into(),
            subject_terms: vec![],
            discipline: String::new(),
            department: String::new(),
            degree: String::new(),
            degree_level: DegreeLevel::Masters,
            etd_type: EtdType::Thesis,
            college,
        }
    }

    #[test]
    fn ten_records_split_eight_two() {
        let rs: Vec<_> = (0..10).map(|i| rec(&i.to_string(), Some(College::Science))).collect();
        let s = split(rs, 0.8, 1).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (8, 2));
    }

    #[test]
    fn deterministic_for_a_seed() {
        let rs: Vec<_> = (0..40)
            .map(|i| rec(&i.to_string(), Some(College::ALL[i % 3])))
            .collect();
        assert_eq!(split(rs.clone(), 0.8, 7).unwrap(), split(rs.clone(), 0.8, 7).unwrap());
        assert_ne!(split(rs.clone(), 0.8, 7).unwrap().test, split(rs, 0.8, 8).unwrap().test);
    }

    #[test]
    fn singleton_college_goes_to_train() {
        let s = split(vec![rec("x", Some(College::Business))], 0.8, 0).unwrap();
        assert_eq!(s.train.len(), 1);
        assert!(s.test.is_empty());
    }

    #[test]
    fn duplicates_stay_together() {
        let mut rs = Vec::new();
        for i in 0..20 {
            rs.push(rec(&format!("e{i}"), Some(College::Engineering)));
            rs.push(rec(&format!("a{i}"), Some(College::AgricultureLifeSciences)));
        }
        for i in 0..5 {
            rs.push(rec(&format!("shared{i}"), Some(College::Engineering)));
            rs.push(rec(&format!("shared{i}"), Some(College::AgricultureLifeSciences)));
        }
        let s = split(rs, 0.8, 3).unwrap();
        let train: HashSet<_> = s.train.iter().map(|r| &r.identifier_uri).collect();
        assert!(s.test.iter().all(|r| !train.contains(&r.identifier_uri)));
        for c in [College::Engineering, College::AgricultureLifeSciences] {
            let tr = s.train.iter().filter(|r| r.college == Some(c)).count() as f64;
            let te = s.test.iter().filter(|r| r.college == Some(c)).count() as f64;
            assert!((tr - 0.8 * (tr + te)).abs() <= 1.0);
        }
    }

    #[test]
    fn ratio_bounds() {
        assert!(split(vec![], 1.0, 0).is_err());
        assert!(split(vec![], 0.0, 0).is_err());
        assert!(split(vec![], f64::NAN, 0).is_err());
    }
}
