//! Rank-based (Mann-Whitney) AUC with average ranks for ties.

use crate::error::{Error, Result};
use crate::graph::Sign;

/// `U / (n_pos * n_neg)` where `U` is the Mann-Whitney statistic of the
/// positive class. Tied scores share their average rank, so a tie between a
/// positive and a negative counts one half.
pub fn auc(scores: &[f64], labels: &[Sign]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimMismatch(scores.len(), labels.len()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Eval("NaN score".into()));
    }
    let n_pos = labels.iter().filter(|l| l.is_positive()).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Eval("AUC needs both classes".into()));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && scores[idx[j]] == scores[idx[i]] {
            j += 1;
        }
        // ranks are 1-based: positions i..j share (i+1 + j) / 2
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        let pos_in_group = idx[i..j].iter().filter(|&&k| labels[k].is_positive()).count();
        rank_sum_pos += avg_rank * pos_in_group as f64;
        i = j;
    }
    let n_pos_f = n_pos as f64;
    let u = rank_sum_pos - n_pos_f * (n_pos_f + 1.0) / 2.0;
    Ok(u / (n_pos_f * n_neg as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Sign::*;

    #[test]
    fn perfect_reversed_and_tied() {
        let labels = [Pos, Pos, Neg, Neg];
        assert_eq!(auc(&[0.9, 0.8, 0.2, 0.1], &labels).unwrap(), 1.0);
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &labels).unwrap(), 0.0);
        assert_eq!(auc(&[0.5; 4], &labels).unwrap(), 0.5);
    }

    #[test]
    fn partial_ties() {
        // pairs (pos, neg): (0.5,0.5) tie, (0.5,0.1) win, (0.9,0.5) win, (0.9,0.1) win
        let v = auc(&[0.5, 0.9, 0.5, 0.1], &[Pos, Pos, Neg, Neg]).unwrap();
        assert!((v - 3.5 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn one_class_is_an_error() {
        assert!(auc(&[0.1, 0.2], &[Pos, Pos]).is_err());
        assert!(auc(&[0.1], &[Pos, Neg]).is_err());
        assert!(auc(&[f64::NAN, 0.2], &[Pos, Neg]).is_err());
    }
}
