//! Pair and triplet plans: exhaustive enumeration and seeded random
//! sampling, including label-stratified triples over match patterns.
//!
//! Random plans use ChaCha12, a counter-based generator, so a (seed, build)
//! pair always reproduces the same plan. Reports record the generator name.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};

/// Name of the random generator behind all sampled plans.
pub const PLAN_RNG: &str = "chacha12";

/// Number of distinct unordered triples over n items.
pub fn triple_space(n: usize) -> u64 {
    if n < 3 {
        return 0;
    }
    let n = n as u128;
    ((n * (n - 1) * (n - 2)) / 6) as u64
}

/// Number of distinct unordered pairs over n items.
pub fn pair_space(n: usize) -> u64 {
    if n < 2 {
        return 0;
    }
    let n = n as u128;
    ((n * (n - 1)) / 2) as u64
}

/// How a plan was generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanMode {
    /// Every unordered triple, lexicographic, streamed.
    Exhaustive,
    /// Distinct triples, uniform without replacement.
    UniformRandom,
    /// Independent uniform draws, with replacement (supports m larger than
    /// the triple space, and binomial rate estimates).
    IidRandom,
    /// Independent draws within label-pattern strata.
    Stratified,
    /// Replayed from a CSV file.
    Imported,
}

impl PlanMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PlanMode::Exhaustive => "exhaustive",
            PlanMode::UniformRandom => "uniform_random",
            PlanMode::IidRandom => "iid_random",
            PlanMode::Stratified => "stratified",
            PlanMode::Imported => "imported",
        }
    }
}

/// Label pattern of a triple: all three samples share a class, exactly one
/// same-class pair occurs, or all three classes differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchPattern {
    AllSame,
    TwoSame,
    AllDistinct,
}

impl MatchPattern {
    pub const ALL: [MatchPattern; 3] = [
        MatchPattern::AllSame,
        MatchPattern::TwoSame,
        MatchPattern::AllDistinct,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MatchPattern::AllSame => "all_same",
            MatchPattern::TwoSame => "two_same",
            MatchPattern::AllDistinct => "all_distinct",
        }
    }

    /// Classify a triple by its labels.
    pub fn of(labels: &[u32], triple: [usize; 3]) -> MatchPattern {
        let [a, b, c] = triple.map(|i| labels[i]);
        let same = (a == b) as u8 + (a == c) as u8 + (b == c) as u8;
        match same {
            3 => MatchPattern::AllSame,
            1 => MatchPattern::TwoSame,
            _ => MatchPattern::AllDistinct,
        }
    }
}

/// Serializable summary of a plan, embedded in audit reports.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PlanDescription {
    pub mode: PlanMode,
    pub n: usize,
    pub count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strata: Option<BTreeMap<MatchPattern, f64>>,
    pub rng: String,
}

/// A set of index triples driving triangle checks. Exhaustive plans are
/// streamed; sampled plans hold their draws in draw order.
#[derive(Debug, Clone)]
pub struct TripletPlan {
    mode: PlanMode,
    n: usize,
    count: u64,
    seed: Option<u64>,
    strata: Option<BTreeMap<MatchPattern, f64>>,
    triples: Option<Vec<[usize; 3]>>,
}

impl TripletPlan {
    pub fn mode(&self) -> PlanMode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn description(&self) -> PlanDescription {
        PlanDescription {
            mode: self.mode,
            n: self.n,
            count: self.count,
            seed: self.seed,
            strata: self.strata.clone(),
            rng: PLAN_RNG.to_string(),
        }
    }

    /// Triples in plan order.
    pub fn iter(&self) -> TripleIter<'_> {
        match &self.triples {
            Some(list) => TripleIter::Listed(list.iter()),
            None => TripleIter::Lexicographic {
                n: self.n,
                next: if self.n >= 3 { Some([0, 1, 2]) } else { None },
            },
        }
    }

    /// Write as CSV (`i,j,k` header then one triple per row).
    pub fn to_csv_writer<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "i,j,k")?;
        for [i, j, k] in self.iter() {
            writeln!(writer, "{i},{j},{k}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.to_csv_writer(&mut buf)?;
        String::from_utf8(buf).map_err(|e| AuditError::PlanError(format!("non-UTF8 output: {e}")))
    }

    /// Read a plan exported with [`TripletPlan::to_csv_writer`]. Triples are
    /// validated against `n` and normalized to ascending index order.
    pub fn from_csv_reader<R: Read>(reader: R, n: usize) -> Result<Self> {
        let mut triples = Vec::new();
        for (idx, line) in BufReader::new(reader).lines().enumerate() {
            let line = line.map_err(AuditError::Io)?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if idx == 0 && trimmed == "i,j,k" {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(AuditError::PlanError(format!(
                    "line {}: expected 3 indices, got {}",
                    idx + 1,
                    fields.len()
                )));
            }
            let mut triple = [0usize; 3];
            for (slot, field) in triple.iter_mut().zip(&fields) {
                *slot = field.parse().map_err(|_| {
                    AuditError::PlanError(format!("line {}: not an index: {field:?}", idx + 1))
                })?;
            }
            validate_triple(triple, n)?;
            triple.sort_unstable();
            triples.push(triple);
        }
        Ok(TripletPlan {
            mode: PlanMode::Imported,
            n,
            count: triples.len() as u64,
            seed: None,
            strata: None,
            triples: Some(triples),
        })
    }

    pub fn from_csv_path(path: impl AsRef<Path>, n: usize) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file, n)
    }
}

fn validate_triple(triple: [usize; 3], n: usize) -> Result<()> {
    let [i, j, k] = triple;
    if i >= n || j >= n || k >= n {
        return Err(AuditError::PlanError(format!(
            "triple ({i},{j},{k}) out of range for n = {n}"
        )));
    }
    if i == j || i == k || j == k {
        return Err(AuditError::PlanError(format!(
            "triple ({i},{j},{k}) has repeated indices"
        )));
    }
    Ok(())
}

/// Streaming iterator over a plan's triples.
pub enum TripleIter<'a> {
    Lexicographic { n: usize, next: Option<[usize; 3]> },
    Listed(std::slice::Iter<'a, [usize; 3]>),
}

impl Iterator for TripleIter<'_> {
    type Item = [usize; 3];

    fn next(&mut self) -> Option<[usize; 3]> {
        match self {
            TripleIter::Listed(inner) => inner.next().copied(),
            TripleIter::Lexicographic { n, next } => {
                let current = (*next)?;
                let [i, j, k] = current;
                *next = if k + 1 < *n {
                    Some([i, j, k + 1])
                } else if j + 2 < *n {
                    Some([i, j + 1, j + 2])
                } else if i + 3 < *n {
                    Some([i + 1, i + 2, i + 3])
                } else {
                    None
                };
                Some(current)
            }
        }
    }
}

/// Every unordered triple over n items, lexicographic, streamed.
pub fn enumerate_triplets(n: usize) -> Result<TripletPlan> {
    if n < 3 {
        return Err(AuditError::TooFewSamples { needed: 3, got: n });
    }
    Ok(TripletPlan {
        mode: PlanMode::Exhaustive,
        n,
        count: triple_space(n),
        seed: None,
        strata: None,
        triples: None,
    })
}

/// Uniform 3-subset of 0..n via Floyd's algorithm, returned ascending.
fn floyd_triple<R: Rng>(rng: &mut R, n: usize) -> [usize; 3] {
    debug_assert!(n >= 3);
    let mut chosen: Vec<usize> = Vec::with_capacity(3);
    for j in (n - 3)..n {
        let t = rng.gen_range(0..=j);
        if chosen.contains(&t) {
            chosen.push(j);
        } else {
            chosen.push(t);
        }
    }
    let mut triple = [chosen[0], chosen[1], chosen[2]];
    triple.sort_unstable();
    triple
}

/// m distinct unordered triples, uniform without replacement, deterministic
/// for a given seed. Rejection sampling while the space is sparse; a partial
/// shuffle of the full enumeration once m exceeds half the space.
pub fn sample_triplets(n: usize, m: u64, seed: u64) -> Result<TripletPlan> {
    if n < 3 {
        return Err(AuditError::TooFewSamples { needed: 3, got: n });
    }
    let space = triple_space(n);
    if m > space {
        return Err(AuditError::OverSampled {
            requested: m,
            available: space,
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let triples: Vec<[usize; 3]> = if m * 2 > space {
        // dense regime: partial Fisher-Yates over the enumeration
        let mut all: Vec<[usize; 3]> = enumerate_triplets(n)?.iter().collect();
        let len = all.len();
        let take = m as usize;
        for i in 0..take.min(len.saturating_sub(1)) {
            let j = rng.gen_range(i..len);
            all.swap(i, j);
        }
        all.truncate(take);
        all
    } else {
        let mut seen: HashSet<[usize; 3]> = HashSet::with_capacity(m as usize);
        let mut out = Vec::with_capacity(m as usize);
        while (out.len() as u64) < m {
            let t = floyd_triple(&mut rng, n);
            if seen.insert(t) {
                out.push(t);
            }
        }
        out
    };
    Ok(TripletPlan {
        mode: PlanMode::UniformRandom,
        n,
        count: m,
        seed: Some(seed),
        strata: None,
        triples: Some(triples),
    })
}

/// m independent uniform triples (with replacement), deterministic for a
/// given seed. Unlike [`sample_triplets`], m may exceed the triple space;
/// draws are i.i.d., so violation counts over the plan are binomial.
pub fn sample_triplets_iid(n: usize, m: u64, seed: u64) -> Result<TripletPlan> {
    if n < 3 {
        return Err(AuditError::TooFewSamples { needed: 3, got: n });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let triples: Vec<[usize; 3]> = (0..m).map(|_| floyd_triple(&mut rng, n)).collect();
    Ok(TripletPlan {
        mode: PlanMode::IidRandom,
        n,
        count: m,
        seed: Some(seed),
        strata: None,
        triples: Some(triples),
    })
}

/// Exact stratum sizes computable from the label multiset alone.
fn stratum_sizes(labels: &[u32]) -> BTreeMap<MatchPattern, u64> {
    let n = labels.len() as u128;
    let mut class_sizes: BTreeMap<u32, u128> = BTreeMap::new();
    for &label in labels {
        *class_sizes.entry(label).or_insert(0) += 1;
    }
    let choose2 = |m: u128| m * m.saturating_sub(1) / 2;
    let choose3 = |m: u128| m * m.saturating_sub(1) * m.saturating_sub(2) / 6;
    let all_same: u128 = class_sizes.values().map(|&m| choose3(m)).sum();
    let two_same: u128 = class_sizes.values().map(|&m| choose2(m) * (n - m)).sum();
    let total = n * (n - 1) * (n - 2) / 6;
    let mut sizes = BTreeMap::new();
    sizes.insert(MatchPattern::AllSame, all_same as u64);
    sizes.insert(MatchPattern::TwoSame, two_same as u64);
    sizes.insert(
        MatchPattern::AllDistinct,
        (total - all_same - two_same) as u64,
    );
    sizes
}

/// Largest-remainder apportionment of m over the requested proportions,
/// pattern order breaking remainder ties.
fn apportion(m: u64, proportions: &BTreeMap<MatchPattern, f64>) -> BTreeMap<MatchPattern, u64> {
    let mut quotas: BTreeMap<MatchPattern, u64> = BTreeMap::new();
    let mut remainders: Vec<(MatchPattern, f64)> = Vec::new();
    let mut assigned = 0u64;
    for pattern in MatchPattern::ALL {
        let p = proportions.get(&pattern).copied().unwrap_or(0.0);
        let exact = m as f64 * p;
        let base = exact.floor() as u64;
        quotas.insert(pattern, base);
        assigned += base;
        remainders.push((pattern, exact - base as f64));
    }
    let mut leftover = m.saturating_sub(assigned);
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    for (pattern, _) in remainders {
        if leftover == 0 {
            break;
        }
        *quotas.get_mut(&pattern).expect("all patterns present") += 1;
        leftover -= 1;
    }
    quotas
}

/// Uniform draw from one class-member list via Floyd's 2-subset.
fn floyd_pair<R: Rng>(rng: &mut R, members: &[usize]) -> [usize; 2] {
    let n = members.len();
    let mut chosen: Vec<usize> = Vec::with_capacity(2);
    for j in (n - 2)..n {
        let t = rng.gen_range(0..=j);
        if chosen.contains(&t) {
            chosen.push(j);
        } else {
            chosen.push(t);
        }
    }
    [members[chosen[0]], members[chosen[1]]]
}

/// Weighted index pick from cumulative u64 weights.
fn pick_weighted<R: Rng>(rng: &mut R, cumulative: &[u64]) -> usize {
    let total = *cumulative.last().expect("non-empty weights");
    let draw = rng.gen_range(0..total);
    cumulative.partition_point(|&c| c <= draw)
}

/// Label-stratified triples: per-pattern counts follow the proportions via
/// largest-remainder rounding; draws are independent and uniform within each
/// stratum (with replacement), deterministic for a given seed.
pub fn stratified_triplets(
    labels: &[u32],
    m: u64,
    proportions: &BTreeMap<MatchPattern, f64>,
    seed: u64,
) -> Result<TripletPlan> {
    let n = labels.len();
    if n < 3 {
        return Err(AuditError::TooFewSamples { needed: 3, got: n });
    }
    for (&pattern, &p) in proportions {
        if !(0.0..=1.0).contains(&p) {
            return Err(AuditError::ConfigError(format!(
                "proportion for {} out of [0, 1]: {p}",
                pattern.as_str()
            )));
        }
    }
    let total: f64 = proportions.values().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(AuditError::ConfigError(format!(
            "stratum proportions must sum to 1, got {total}"
        )));
    }

    let sizes = stratum_sizes(labels);
    let quotas = apportion(m, proportions);
    for pattern in MatchPattern::ALL {
        if quotas[&pattern] > 0 && sizes[&pattern] == 0 {
            return Err(AuditError::EmptyStratum(pattern.as_str()));
        }
    }

    let mut members: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (idx, &label) in labels.iter().enumerate() {
        members.entry(label).or_default().push(idx);
    }
    let classes: Vec<(u32, Vec<usize>)> = members.into_iter().collect();

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut triples: Vec<[usize; 3]> = Vec::with_capacity(m as usize);

    // all-same: pick a class weighted by its triple count, then a 3-subset
    if quotas[&MatchPattern::AllSame] > 0 {
        let mut cumulative = Vec::new();
        let mut eligible = Vec::new();
        let mut acc = 0u64;
        for (label, mem) in &classes {
            let c = triple_space(mem.len());
            if c > 0 {
                acc += c;
                cumulative.push(acc);
                eligible.push((*label, mem));
            }
        }
        for _ in 0..quotas[&MatchPattern::AllSame] {
            let (_, mem) = eligible[pick_weighted(&mut rng, &cumulative)];
            let local = floyd_triple(&mut rng, mem.len());
            let mut triple = local.map(|i| mem[i]);
            triple.sort_unstable();
            triples.push(triple);
        }
    }

    // two-same: pick the pair's class weighted by C(m_c,2)*(n-m_c), a pair
    // inside it, and an outsider
    if quotas[&MatchPattern::TwoSame] > 0 {
        let mut cumulative = Vec::new();
        let mut eligible = Vec::new();
        let mut acc = 0u64;
        for (label, mem) in &classes {
            let c = pair_space(mem.len()) * (n - mem.len()) as u64;
            if c > 0 {
                acc += c;
                cumulative.push(acc);
                eligible.push((*label, mem));
            }
        }
        for _ in 0..quotas[&MatchPattern::TwoSame] {
            let (label, mem) = eligible[pick_weighted(&mut rng, &cumulative)];
            let pair = floyd_pair(&mut rng, mem);
            let outsiders = n - mem.len();
            let mut pick = rng.gen_range(0..outsiders);
            let mut third = None;
            for (idx, &l) in labels.iter().enumerate() {
                if l != label {
                    if pick == 0 {
                        third = Some(idx);
                        break;
                    }
                    pick -= 1;
                }
            }
            let mut triple = [pair[0], pair[1], third.expect("outsider exists")];
            triple.sort_unstable();
            triples.push(triple);
        }
    }

    // all-distinct: enumerate class triples while the class count is small,
    // otherwise rejection-sample from the whole space
    if quotas[&MatchPattern::AllDistinct] > 0 {
        let k = classes.len();
        if k <= 128 {
            let mut cumulative = Vec::new();
            let mut combos: Vec<(usize, usize, usize)> = Vec::new();
            let mut acc = 0u64;
            for a in 0..k {
                for b in (a + 1)..k {
                    for c in (b + 1)..k {
                        let w =
                            (classes[a].1.len() * classes[b].1.len() * classes[c].1.len()) as u64;
                        acc += w;
                        cumulative.push(acc);
                        combos.push((a, b, c));
                    }
                }
            }
            if cumulative.is_empty() {
                return Err(AuditError::EmptyStratum(MatchPattern::AllDistinct.as_str()));
            }
            for _ in 0..quotas[&MatchPattern::AllDistinct] {
                let (a, b, c) = combos[pick_weighted(&mut rng, &cumulative)];
                let pick =
                    |rng: &mut ChaCha12Rng, mem: &Vec<usize>| mem[rng.gen_range(0..mem.len())];
                let mut triple = [
                    pick(&mut rng, &classes[a].1),
                    pick(&mut rng, &classes[b].1),
                    pick(&mut rng, &classes[c].1),
                ];
                triple.sort_unstable();
                triples.push(triple);
            }
        } else {
            for _ in 0..quotas[&MatchPattern::AllDistinct] {
                loop {
                    let t = floyd_triple(&mut rng, n);
                    if MatchPattern::of(labels, t) == MatchPattern::AllDistinct {
                        triples.push(t);
                        break;
                    }
                }
            }
        }
    }

    Ok(TripletPlan {
        mode: PlanMode::Stratified,
        n,
        count: m,
        seed: Some(seed),
        strata: Some(proportions.clone()),
        triples: Some(triples),
    })
}

/// Stream of index pairs: `i < j` when unordered, all `i != j` otherwise.
pub fn enumerate_pairs(n: usize, ordered: bool) -> Result<impl Iterator<Item = (usize, usize)>> {
    if n < 2 {
        return Err(AuditError::TooFewSamples { needed: 2, got: n });
    }
    Ok((0..n).flat_map(move |i| {
        let start = if ordered { 0 } else { i + 1 };
        (start..n).filter_map(move |j| (i != j).then_some((i, j)))
    }))
}
