use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationPair<L> {
    pub item_id: String,
    pub label_a: L,
    pub label_b: L,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("no annotation pairs")]
pub struct EmptyAnnotations;

/// Cohen's kappa between two annotators.
///
/// Returns exactly 1.0 when expected agreement is 1 (both annotators used a
/// single, shared label everywhere).
pub fn cohens_kappa<L: Ord>(pairs: &[AnnotationPair<L>]) -> Result<f64, EmptyAnnotations> {
    if pairs.is_empty() {
        return Err(EmptyAnnotations);
    }
    let n = pairs.len() as f64;
    let mut a: BTreeMap<&L, usize> = BTreeMap::new();
    let mut b: BTreeMap<&L, usize> = BTreeMap::new();
    let mut agree = 0usize;
    for p in pairs {
        *a.entry(&p.label_a).or_default() += 1;
        *b.entry(&p.label_b).or_default() += 1;
        if p.label_a == p.label_b {
            agree += 1;
        }
    }
    let po = agree as f64 / n;
    let pe: f64 = a
        .iter()
        .map(|(label, &ca)| ca as f64 * b.get(label).copied().unwrap_or(0) as f64)
        .sum::<f64>()
        / (n * n);
    if pe == 1.0 {
        return Ok(1.0);
    }
    Ok((po - pe) / (1.0 - pe))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(cells: [(u8, u8, usize); 4]) -> Vec<AnnotationPair<u8>> {
        let mut out = Vec::new();
        for (a, b, count) in cells {
            for _ in 0..count {
                out.push(AnnotationPair {
                    item_id: out.len().to_string(),
                    label_a: a,
                    label_b: b,
                });
            }
        }
        out
    }

    #[test]
    fn two_by_two() {
        let k = cohens_kappa(&pairs([(0, 0, 20), (0, 1, 5), (1, 0, 10), (1, 1, 15)])).unwrap();
        // po = 0.7, pe = 0.5*0.6 + 0.5*0.4
        assert!((k - 0.4).abs() < 1e-15);
    }

    #[test]
    fn degenerate_and_perfect() {
        let single = pairs([(1, 1, 7), (0, 0, 0), (0, 1, 0), (1, 0, 0)]);
        assert_eq!(cohens_kappa(&single).unwrap(), 1.0);
        let perfect = pairs([(0, 0, 3), (1, 1, 4), (0, 1, 0), (1, 0, 0)]);
        assert_eq!(cohens_kappa(&perfect).unwrap(), 1.0);
        assert_eq!(cohens_kappa::<u8>(&[]), Err(EmptyAnnotations));
    }
}
