// SPDX-License-Identifier: Apache-2.0

//! Interchangeable DSP-count search strategies, looked up by name.

use std::collections::BTreeSet;

use rayon::prelude::*;

use super::{network_cost, NetworkSpec, OptimizeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOutcome {
    pub n_dsp: u64,
    pub cycles: u64,
    /// Cost-model evaluations spent.
    pub evaluations: usize,
}

pub trait DspSearch: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn search(&self, net: &NetworkSpec) -> Result<SearchOutcome, OptimizeError>;
}

/// Lowest cost over `candidates`, smallest `n_dsp` on ties.
fn argmin(net: &NetworkSpec, candidates: &[u64]) -> Result<SearchOutcome, OptimizeError> {
    let costs =
        candidates.par_iter().map(|&n| Ok((network_cost(net, n)?, n))).collect::<Result<Vec<_>, OptimizeError>>()?;
    let (cycles, n_dsp) = costs.into_iter().min().ok_or_else(|| OptimizeError::Invalid("empty search range".into()))?;
    Ok(SearchOutcome { n_dsp, cycles, evaluations: candidates.len() })
}

/// Every `n_dsp` in `1..=N`. The reference the other strategies are checked
/// against.
#[derive(Debug, Default)]
pub struct FullScan;

impl DspSearch for FullScan {
    fn name(&self) -> &'static str {
        "full-scan"
    }

    fn description(&self) -> &'static str {
        "evaluate every DSP count up to the device budget"
    }

    fn search(&self, net: &NetworkSpec) -> Result<SearchOutcome, OptimizeError> {
        net.validate()?;
        let all: Vec<u64> = (1..=net.n_dsp_max).collect();
        argmin(net, &all)
    }
}

/// DSP counts where some level's sub-kernel count drops, plus 1.
///
/// Between two consecutive breakpoints every sub-kernel count is fixed and
/// all remaining terms grow with `n_dsp`, so each interval's cheapest point
/// is its left end.
pub fn breakpoints(net: &NetworkSpec) -> BTreeSet<u64> {
    let max = net.n_dsp_max;
    let mut set = BTreeSet::from([1]);
    for g in net.layers.iter().flat_map(|l| l.stats.gates_per_level.iter().copied()) {
        if g == 0 {
            continue;
        }
        let mut n = 1u64;
        while n <= max {
            set.insert(n);
            let q = g.div_ceil(n);
            if q == 1 {
                break;
            }
            // Smallest n' with ceil(g / n') <= q - 1.
            n = g.div_ceil(q - 1);
        }
    }
    set
}

/// Scans only the breakpoint set; returns the global optimum.
#[derive(Debug, Default)]
pub struct ExhaustiveBreakpoints;

impl DspSearch for ExhaustiveBreakpoints {
    fn name(&self) -> &'static str {
        "exhaustive"
    }

    fn description(&self) -> &'static str {
        "evaluate the left end of every interval of constant sub-kernel counts"
    }

    fn search(&self, net: &NetworkSpec) -> Result<SearchOutcome, OptimizeError> {
        net.validate()?;
        let candidates: Vec<u64> = breakpoints(net).into_iter().collect();
        argmin(net, &candidates)
    }
}

/// Interval narrowing on the cost curve, exact only when the curve is
/// unimodal.
#[derive(Debug, Default)]
pub struct BinarySearch;

impl DspSearch for BinarySearch {
    fn name(&self) -> &'static str {
        "binary"
    }

    fn description(&self) -> &'static str {
        "narrow the DSP range by comparing interior points (unimodal curves only)"
    }

    fn search(&self, net: &NetworkSpec) -> Result<SearchOutcome, OptimizeError> {
        net.validate()?;
        let (mut lo, mut hi) = (1u64, net.n_dsp_max);
        let mut evaluations = 0;
        while hi - lo > 2 {
            let third = (hi - lo) / 3;
            let (m1, m2) = (lo + third, hi - third);
            let (c1, c2) = (network_cost(net, m1)?, network_cost(net, m2)?);
            evaluations += 2;
            if c1 <= c2 {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let tail: Vec<u64> = (lo..=hi).collect();
        let best = argmin(net, &tail)?;
        Ok(SearchOutcome { evaluations: evaluations + best.evaluations, ..best })
    }
}

/// Name-indexed set of search strategies.
pub struct SearchRegistry {
    entries: Vec<Box<dyn DspSearch>>,
}

impl SearchRegistry {
    pub fn empty() -> Self {
        SearchRegistry { entries: Vec::new() }
    }

    pub fn builtin() -> Self {
        let mut r = SearchRegistry::empty();
        r.register(Box::new(ExhaustiveBreakpoints));
        r.register(Box::new(BinarySearch));
        r.register(Box::new(FullScan));
        r
    }

    /// Adds a strategy, replacing any existing one with the same name.
    pub fn register(&mut self, s: Box<dyn DspSearch>) {
        self.entries.retain(|e| e.name() != s.name());
        self.entries.push(s);
    }

    pub fn get(&self, name: &str) -> Option<&dyn DspSearch> {
        self.entries.iter().find(|e| e.name() == name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn DspSearch> {
        self.entries.iter().map(|b| b.as_ref())
    }
}

/// Runs the built-in strategy called `mode`.
pub fn optimize_dsp(net: &NetworkSpec, mode: &str) -> Result<SearchOutcome, OptimizeError> {
    let registry = SearchRegistry::builtin();
    let strategy = registry.get(mode).ok_or_else(|| OptimizeError::UnknownMode(mode.to_string()))?;
    strategy.search(net)
}
