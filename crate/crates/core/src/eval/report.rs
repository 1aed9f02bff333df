//! Evaluation results: per-fold AUC records, summaries and CSV output.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::io::Write;

use crate::edge::EdgeOp;
use crate::error::Result;
use crate::sgns::CombineMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    All,
    ColdStart,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::All => "all",
            Split::ColdStart => "coldstart",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AucRecord {
    pub classifier: String,
    pub sigma: CombineMode,
    pub phi: EdgeOp,
    pub fold: usize,
    pub split: Split,
    pub auc: f64,
    /// Test edges scored.
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldInfo {
    pub fold: usize,
    pub n_train: usize,
    pub n_balanced: usize,
    pub n_test: usize,
    pub n_coldstart: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalReport {
    pub records: Vec<AucRecord>,
    pub folds: Vec<FoldInfo>,
}

type Key = (String, CombineMode, EdgeOp, Split);

impl EvalReport {
    pub fn fold_aucs(&self, classifier: &str, sigma: CombineMode, phi: EdgeOp, split: Split) -> Vec<f64> {
        let mut v: Vec<(usize, f64)> = self
            .records
            .iter()
            .filter(|r| r.classifier == classifier && r.sigma == sigma && r.phi == phi && r.split == split)
            .map(|r| (r.fold, r.auc))
            .collect();
        v.sort_by_key(|&(f, _)| f);
        v.into_iter().map(|(_, a)| a).collect()
    }

    pub fn mean_auc(&self, classifier: &str, sigma: CombineMode, phi: EdgeOp, split: Split) -> Option<f64> {
        let v = self.fold_aucs(classifier, sigma, phi, split);
        if v.is_empty() {
            None
        } else {
            Some(v.iter().sum::<f64>() / v.len() as f64)
        }
    }

    /// Highest fold-mean AUC over edge operators. Selected on the test folds
    /// themselves, so it is optimistic; the raw sweep is kept in `records`.
    pub fn best_over_phi(&self, classifier: &str, sigma: CombineMode, split: Split) -> Option<(EdgeOp, f64)> {
        EdgeOp::ALL
            .iter()
            .filter_map(|&op| self.mean_auc(classifier, sigma, op, split).map(|m| (op, m)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn coldstart_fraction(&self) -> f64 {
        let test: usize = self.folds.iter().map(|f| f.n_test).sum();
        let cold: usize = self.folds.iter().map(|f| f.n_coldstart).sum();
        if test == 0 {
            0.0
        } else {
            cold as f64 / test as f64
        }
    }

    fn grouped(&self) -> BTreeMap<Key, Vec<f64>> {
        let mut m: BTreeMap<Key, Vec<f64>> = BTreeMap::new();
        for r in &self.records {
            m.entry((r.classifier.clone(), r.sigma, r.phi, r.split)).or_default().push(r.auc);
        }
        m
    }

    /// `classifier,sigma,phi,fold,split,auc` with a header row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "classifier,sigma,phi,fold,split,auc")?;
        let mut rows: Vec<&AucRecord> = self.records.iter().collect();
        rows.sort_by(|a, b| {
            (&a.classifier, a.sigma, a.phi, a.split, a.fold).cmp(&(&b.classifier, b.sigma, b.phi, b.split, b.fold))
        });
        for r in rows {
            writeln!(w, "{},{},{},{},{},{:.6}", r.classifier, r.sigma, r.phi, r.fold, r.split, r.auc)?;
        }
        Ok(())
    }

    /// Human-readable table of fold means (with spread) and best-over-operator rows.
    pub fn summary_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<12} {:<9} {:<9} {:<10} {:>8} {:>8} {:>6}",
            "classifier", "sigma", "phi", "split", "mean", "std", "folds"
        );
        let grouped = self.grouped();
        for ((c, sigma, phi, split), v) in &grouped {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            let _ = writeln!(
                s,
                "{:<12} {:<9} {:<9} {:<10} {:>8.4} {:>8.4} {:>6}",
                c,
                sigma.name(),
                phi.name(),
                split.name(),
                mean,
                var.sqrt(),
                v.len()
            );
        }
        let seen: std::collections::BTreeSet<(String, CombineMode, Split)> = grouped
            .keys()
            .map(|(c, sigma, _, split)| (c.clone(), *sigma, *split))
            .collect();
        let _ = writeln!(s, "\nbest over phi (selected on test folds):");
        for (c, sigma, split) in seen {
            if let Some((op, m)) = self.best_over_phi(&c, sigma, split) {
                let _ = writeln!(s, "{:<12} {:<9} {:<10} {:>8.4} ({})", c, sigma.name(), split.name(), m, op.name());
            }
        }
        if !self.folds.is_empty() {
            let _ = writeln!(s, "\ncold-start share of test edges: {:.3}", self.coldstart_fraction());
        }
        s
    }
}
