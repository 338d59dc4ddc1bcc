use serde::{Deserialize, Serialize};

use super::{ClassPartition, DatasetRecord};
use crate::error::{Error, Result};
use crate::numeric::SeededRng;

pub const DEFAULT_TEST_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainTestSplit {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// Per-class test size: `round(fraction * size)`, at least one and at most
/// `size - 1` for classes with two or more records; singletons stay in train.
pub fn test_count(class_size: usize, fraction: f64) -> usize {
    if class_size < 2 {
        return 0;
    }
    let k = (fraction * class_size as f64).round() as usize;
    k.clamp(1, class_size - 1)
}

/// Stratified split. Both id lists come back in dataset order.
pub fn split_train_test(records: &[DatasetRecord], test_fraction: f64, rng: &mut SeededRng) -> Result<TrainTestSplit> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::contract(format!("test fraction must lie in (0, 1), got {test_fraction}")));
    }
    if records.is_empty() {
        return Err(Error::contract("cannot split an empty dataset"));
    }
    let position: std::collections::HashMap<&str, usize> =
        records.iter().enumerate().map(|(i, r)| (r.id.as_str(), i)).collect();
    let partition = ClassPartition::from_records(records);

    let mut is_test = vec![false; records.len()];
    for ids in partition.groups.values() {
        let mut idx: Vec<usize> = ids.iter().map(|id| position[id.as_str()]).collect();
        rng.shuffle(&mut idx);
        for &i in idx.iter().take(test_count(idx.len(), test_fraction)) {
            is_test[i] = true;
        }
    }

    let mut split = TrainTestSplit {
        train: Vec::new(),
        test: Vec::new(),
    };
    for (r, t) in records.iter().zip(is_test) {
        if t {
            split.test.push(r.id.clone());
        } else {
            split.train.push(r.id.clone());
        }
    }
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records(labels: &[u32]) -> Vec<DatasetRecord> {
        labels
            .iter()
            .enumerate()
            .map(|(i, &label)| DatasetRecord {
                id: i.to_string(),
                text: String::new(),
                label,
            })
            .collect()
    }

    #[test]
    fn ten_percent_of_one_class() {
        let recs = records(&[0; 100]);
        let s = split_train_test(&recs, 0.1, &mut SeededRng::new(1)).unwrap();
        assert_eq!((s.test.len(), s.train.len()), (10, 90));
    }

    #[test]
    fn half_of_two() {
        let recs = records(&[3, 3]);
        let s = split_train_test(&recs, 0.5, &mut SeededRng::new(1)).unwrap();
        assert_eq!((s.test.len(), s.train.len()), (1, 1));
    }

    #[test]
    fn stratified_per_label() {
        let mut labels = vec![0; 50];
        labels.extend(vec![1; 30]);
        labels.extend(vec![2; 3]);
        let recs = records(&labels);
        let s = split_train_test(&recs, 0.1, &mut SeededRng::new(9)).unwrap();
        let count = |l: u32| s.test.iter().filter(|id| recs[id.parse::<usize>().unwrap()].label == l).count();
        assert_eq!((count(0), count(1), count(2)), (5, 3, 1));
    }

    #[test]
    fn deterministic_for_seed() {
        let recs = records(&[0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 0]);
        let a = split_train_test(&recs, 0.3, &mut SeededRng::new(5)).unwrap();
        let b = split_train_test(&recs, 0.3, &mut SeededRng::new(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_fraction_or_empty_rejected() {
        let recs = records(&[0, 0]);
        assert!(split_train_test(&recs, 0.0, &mut SeededRng::new(1)).is_err());
        assert!(split_train_test(&recs, 1.0, &mut SeededRng::new(1)).is_err());
        assert!(split_train_test(&[], 0.1, &mut SeededRng::new(1)).is_err());
    }

    #[test]
    fn test_count_bounds() {
        assert_eq!(test_count(1, 0.9), 0);
        assert_eq!(test_count(2, 0.9), 1);
        assert_eq!(test_count(5, 0.01), 1);
        assert_eq!(test_count(600, 0.1), 60);
    }
}
