//! Uniform measures on periodic points, their pushforwards, cylinder tables
//! of maximal-entropy measures across cover stages, and the comparison of a
//! Markov measure with the Parry measure.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use serde::Serialize;

use crate::blockcodes::{apply_orbit, BlockMap};
use crate::bounds::xi_log;
use crate::cover::{cover_stage, SubshiftOracle};
use crate::error::{Error, Result};
use crate::sft::{PeriodicOrbit, VertexShift};
use crate::spectral::{markov_cylinder, parry_cylinder, MarkovMeasure, ParryMeasure, PowerOptions};
use crate::words::{cyclic_occurrences, Alphabet, Word};

pub type Probability = Ratio<u64>;

/// `μ_p = |℘_p|^{-1} Σ_{x ∈ ℘_p} δ_x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomicPeriodicMeasure {
    orbits: Vec<PeriodicOrbit>,
    period: usize,
    total_points: u64,
}

pub fn atomic_measure(orbits: impl IntoIterator<Item = PeriodicOrbit>) -> Result<AtomicPeriodicMeasure> {
    let set: BTreeSet<PeriodicOrbit> = orbits.into_iter().collect();
    let period = set
        .first()
        .map(|o| o.period())
        .ok_or_else(|| Error::InvalidArgument("atomic measure needs at least one orbit".into()))?;
    if set.iter().any(|o| o.period() != period) {
        return Err(Error::InvalidArgument("orbits have different minimal periods".into()));
    }
    let total_points = (set.len() * period) as u64;
    Ok(AtomicPeriodicMeasure {
        orbits: set.into_iter().collect(),
        period,
        total_points,
    })
}

impl AtomicPeriodicMeasure {
    pub fn orbits(&self) -> &[PeriodicOrbit] {
        &self.orbits
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn total_points(&self) -> u64 {
        self.total_points
    }

    /// `μ([w])`: cyclic occurrences of `w` over all orbits, divided by `|℘_p|`.
    pub fn cylinder(&self, w: &[u8]) -> Probability {
        let hits: usize = self
            .orbits
            .iter()
            .map(|o| cyclic_occurrences(w, o.period_word()).expect("nonempty period"))
            .sum();
        Ratio::new(hits as u64, self.total_points)
    }

    fn as_weighted(&self) -> WeightedOrbits {
        self.orbits.iter().map(|o| (o.clone(), o.period() as u64)).collect()
    }
}

pub fn atomic_cylinder(mu: &AtomicPeriodicMeasure, w: &[u8]) -> Probability {
    mu.cylinder(w)
}

/// Orbit → number of points of mass `1/total` it carries.
type WeightedOrbits = BTreeMap<PeriodicOrbit, u64>;

fn weighted_cylinder(m: &WeightedOrbits, total: u64, w: &[u8]) -> Probability {
    let mut acc = Ratio::from_integer(0u64);
    for (o, &mass) in m {
        let hits = cyclic_occurrences(w, o.period_word()).expect("nonempty period") as u64;
        // each of the period's points carries mass / period
        acc += Ratio::new(hits * mass, o.period() as u64);
    }
    acc / total
}

/// `φ_* μ` for an atomic periodic measure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pushforward {
    /// Image orbits with the number of source points landing on each.
    pub image: Vec<(String, u64)>,
    pub total_points: u64,
    /// The image orbit multiset equals the source: `φ` permutes `℘_p`.
    pub permutation: bool,
    /// Exact agreement of every cylinder of length at most `2p`.
    pub cylinders_agree: bool,
    pub cylinders_checked: usize,
    pub first_disagreement: Option<String>,
}

impl Pushforward {
    pub fn invariant(&self) -> bool {
        self.permutation && self.cylinders_agree
    }
}

pub fn pushforward(phi: &BlockMap, mu: &AtomicPeriodicMeasure) -> Result<Pushforward> {
    let mut image: WeightedOrbits = BTreeMap::new();
    for o in &mu.orbits {
        let img = apply_orbit(phi, o)?;
        *image.entry(img).or_default() += o.period() as u64;
    }
    let source = mu.as_weighted();
    let permutation = image == source;
    // only words seen in some orbit can have positive mass
    let mut words: BTreeSet<Word> = BTreeSet::new();
    for o in source.keys().chain(image.keys()) {
        let c = o.period_word();
        let p = c.len();
        for n in 1..=2 * mu.period {
            for i in 0..p {
                words.insert((0..n).map(|j| c[(i + j) % p]).collect());
            }
        }
    }
    let first_disagreement = words
        .iter()
        .find(|w| weighted_cylinder(&image, mu.total_points, w) != mu.cylinder(w))
        .map(|w| phi.codomain().render(w));
    let alphabet = phi.codomain();
    Ok(Pushforward {
        image: image.iter().map(|(o, &m)| (o.display(alphabet), m)).collect(),
        total_points: mu.total_points,
        permutation,
        cylinders_agree: first_disagreement.is_none(),
        cylinders_checked: words.len(),
        first_disagreement,
    })
}

/// `(word, μ([word]))` for every word of length `1 … ℓ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CylinderTable {
    pub rows: Vec<(String, f64)>,
}

impl CylinderTable {
    pub fn parry(m: &ParryMeasure, ell: usize) -> Result<Self> {
        let a = m.shift().alphabet();
        let mut rows = Vec::new();
        for n in 1..=ell {
            for w in a.all_words(n) {
                rows.push((w.display(a), parry_cylinder(m, &w)?));
            }
        }
        Ok(CylinderTable { rows })
    }

    /// Largest deviation of a length-`n` row sum from 1.
    pub fn row_sum_error(&self) -> f64 {
        let mut sums: BTreeMap<usize, f64> = BTreeMap::new();
        for (w, p) in &self.rows {
            *sums.entry(w.chars().count()).or_default() += p;
        }
        sums.values().map(|s| (s - 1.0).abs()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageStatus {
    pub stage: usize,
    /// `None` when the stage was used; otherwise why it was skipped.
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageRow {
    pub stage: usize,
    pub word: String,
    pub probability: f64,
    /// Difference from the previous used stage.
    pub delta_prev: Option<f64>,
    /// `|δ| > 2 / min(n, n′)`.
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageTable {
    pub stages: Vec<StageStatus>,
    pub rows: Vec<StageRow>,
}

impl StageTable {
    pub fn probability(&self, stage: usize, word: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.stage == stage && r.word == word)
            .map(|r| r.probability)
    }

    pub fn max_delta(&self) -> f64 {
        self.rows
            .iter()
            .filter_map(|r| r.delta_prev)
            .map(f64::abs)
            .fold(0.0, f64::max)
    }
}

fn stage_parry(oracle: &SubshiftOracle, n: usize, opts: PowerOptions) -> Result<std::result::Result<ParryMeasure, String>> {
    let spec = cover_stage(oracle, n)?.spec;
    let shift = match spec.vertex_shift() {
        Ok(v) => v,
        Err(Error::EmptyShift) => return Ok(Err("empty stage".into())),
        Err(e @ Error::CapExceeded { .. }) => return Ok(Err(e.to_string())),
        Err(e) => return Err(e),
    };
    if shift.is_empty() {
        return Ok(Err("empty stage".into()));
    }
    if shift.primitivity().is_none() {
        return Ok(Err("not mixing".into()));
    }
    Ok(Ok(ParryMeasure::new(&shift, opts)?))
}

/// `μ_n([w])` for the Parry measure of each cover stage `X_n`.
pub fn mme_stage_table(oracle: &SubshiftOracle, stages: &[usize], words: &[Word]) -> Result<StageTable> {
    let opts = PowerOptions::default();
    let a = oracle.alphabet();
    let mut statuses = Vec::new();
    let mut rows = Vec::new();
    let mut prev: Option<(usize, Vec<f64>)> = None;
    for &n in stages {
        let parry = match stage_parry(oracle, n, opts)? {
            Ok(m) => m,
            Err(reason) => {
                statuses.push(StageStatus {
                    stage: n,
                    skipped: Some(reason),
                });
                continue;
            }
        };
        statuses.push(StageStatus { stage: n, skipped: None });
        let values = words
            .iter()
            .map(|w| parry_cylinder(&parry, w))
            .collect::<Result<Vec<_>>>()?;
        for (i, w) in words.iter().enumerate() {
            let delta = prev.as_ref().map(|(_, pv)| values[i] - pv[i]);
            let flagged = match (&prev, delta) {
                (Some((m, _)), Some(d)) => d.abs() > 2.0 / n.min(*m).max(1) as f64,
                _ => false,
            };
            rows.push(StageRow {
                stage: n,
                word: w.display(a),
                probability: values[i],
                delta_prev: delta,
                flagged,
            });
        }
        prev = Some((n, values));
    }
    Ok(StageTable { stages: statuses, rows })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IeReport {
    pub ell: usize,
    pub states: usize,
    /// `max_{|w| ≤ ℓ} |μ′([w]) − μ([w])|`
    pub max_cylinder_gap: f64,
    pub worst_word: String,
    /// `h_top − h(μ′)`
    pub entropy_gap: f64,
    /// `ln ε*`, the least `ε` whose entropy threshold exceeds the gap; the
    /// implication then asserts a cylinder gap of at most `ε*`.
    pub eps_star_log: f64,
    pub holds: bool,
}

/// Compare a Markov measure with the Parry measure on all cylinders up to
/// length `ℓ`, and test the implication "entropy gap below
/// `ε²/((4/3)^{2ℓ} ξ(s)²)` ⇒ cylinder gap below `ε`" for every `ε` at once.
pub fn effective_ie_check(v: &VertexShift, mu_prime: &MarkovMeasure, ell: usize) -> Result<IeReport> {
    if v.primitivity().is_none() {
        return Err(Error::NotMixing);
    }
    if mu_prime.shift() != v {
        return Err(Error::InvalidArgument("Markov measure lives on a different shift".into()));
    }
    let parry = ParryMeasure::new(v, PowerOptions::default())?;
    let a: &Alphabet = v.alphabet();
    let mut gap = 0.0;
    let mut worst = String::new();
    for n in 1..=ell {
        for w in a.all_words(n) {
            let d = (markov_cylinder(mu_prime, &w)? - parry_cylinder(&parry, &w)?).abs();
            if d > gap {
                gap = d;
                worst = w.display(a);
            }
        }
    }
    let entropy_gap = (parry.perron().lambda.ln() - mu_prime.entropy()).max(0.0);
    let s = v.len() as u64;
    let eps_star_log = if entropy_gap > 0.0 {
        (entropy_gap.ln() + 2.0 * ell as f64 * (4.0f64 / 3.0).ln() + 2.0 * xi_log(s.max(2))?) / 2.0
    } else {
        f64::NEG_INFINITY
    };
    // a vanishing gap is compared with a rounding allowance
    let holds = if entropy_gap > 0.0 {
        gap.ln() <= eps_star_log
    } else {
        gap <= 1e-12
    };
    Ok(IeReport {
        ell,
        states: v.len(),
        max_cylinder_gap: gap,
        worst_word: worst,
        entropy_gap,
        eps_star_log,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sft::SftSpec;
    use crate::words::Alphabet;

    fn orbit(s: &str) -> PeriodicOrbit {
        PeriodicOrbit::of(&Word::binary(s)).unwrap()
    }

    fn golden() -> VertexShift {
        SftSpec::from_words(&Alphabet::binary(), &["11"]).unwrap().vertex_shift().unwrap()
    }

    #[test]
    fn atomic_examples() {
        let full1 = atomic_measure([orbit("0"), orbit("1")]).unwrap();
        assert_eq!(full1.total_points(), 2);
        assert_eq!(full1.cylinder(&[0]), Ratio::new(1, 2));
        let g2 = atomic_measure([orbit("01")]).unwrap();
        assert_eq!(g2.total_points(), 2);
        assert_eq!(g2.cylinder(&[0, 1]), Ratio::new(1, 2));
        assert_eq!(g2.cylinder(&[1, 1]), Ratio::from_integer(0));
        assert!(atomic_measure([]).is_err());
        assert!(atomic_measure([orbit("0"), orbit("01")]).is_err());
        // duplicates collapse
        assert_eq!(atomic_measure([orbit("01"), orbit("10")]).unwrap().orbits().len(), 1);
    }

    #[test]
    fn pushforward_examples() {
        let flip = BlockMap::flip();
        let full1 = atomic_measure([orbit("0"), orbit("1")]).unwrap();
        let r = pushforward(&flip, &full1).unwrap();
        assert!(r.permutation && r.invariant());
        let full2 = atomic_measure([orbit("01")]).unwrap();
        assert!(pushforward(&flip, &full2).unwrap().invariant());
        let bin = Alphabet::binary();
        let collapse = BlockMap::total(0, bin.clone(), bin, |_| 0).unwrap();
        let r = pushforward(&collapse, &full2).unwrap();
        assert!(!r.permutation && !r.invariant());
        assert_eq!(r.image, vec![("0".to_string(), 2)]);
        assert_eq!(r.first_disagreement.as_deref(), Some("0"));
    }

    #[test]
    fn parry_table_rows_sum_to_one() {
        let p = ParryMeasure::new(&golden(), PowerOptions::default()).unwrap();
        let t = CylinderTable::parry(&p, 6).unwrap();
        assert_eq!(t.rows.len(), 126);
        assert!(t.row_sum_error() < 1e-10);
    }

    #[test]
    fn stage_tables() {
        let g = SubshiftOracle::golden_mean(10);
        let words: Vec<Word> = ["0", "01", "010"].iter().map(|s| Word::binary(s)).collect();
        let t = mme_stage_table(&g, &(2..=8).collect::<Vec<_>>(), &words).unwrap();
        assert!(t.max_delta() < 1e-12);
        let t = mme_stage_table(&g, &[1, 2], &words[..1]).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((t.probability(1, "0").unwrap() - 0.5).abs() < 1e-12);
        assert!((t.probability(2, "0").unwrap() - phi * phi / (phi * phi + 1.0)).abs() < 1e-12);
        assert!(!t.rows[1].flagged);
        let f = SubshiftOracle::full_shift(2, 6).unwrap();
        let t = mme_stage_table(&f, &[1, 3, 6], &words).unwrap();
        assert!(t.stages.iter().all(|s| s.skipped.is_none()));
        assert_eq!(t.max_delta(), 0.0);
    }

    #[test]
    fn non_mixing_stage_is_skipped() {
        // forbidding 00 and 11 leaves the single orbit (01)^∞
        let spec = SftSpec::from_words(&Alphabet::binary(), &["00", "11"]).unwrap();
        let o = SubshiftOracle::sft(&spec, 6, "alternating");
        let t = mme_stage_table(&o, &[1, 2, 3], &[Word::binary("0")]).unwrap();
        assert_eq!(t.stages[0].skipped, None);
        assert_eq!(t.stages[1].skipped.as_deref(), Some("not mixing"));
        assert_eq!(t.rows.len(), 1);
    }

    fn perturbed(delta: f64) -> MarkovMeasure {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let p = 1.0 / phi + delta;
        MarkovMeasure::new(&golden(), vec![vec![p, 1.0 - p], vec![1.0, 0.0]]).unwrap()
    }

    #[test]
    fn parry_chain_has_no_gap() {
        let v = golden();
        let p = ParryMeasure::new(&v, PowerOptions::default()).unwrap();
        let r = effective_ie_check(&v, &p.markov_chain(), 4).unwrap();
        assert!(r.max_cylinder_gap < 1e-12 && r.entropy_gap < 1e-12 && r.holds);
    }

    #[test]
    fn perturbed_chain_against_closed_forms() {
        let v = golden();
        let d = 0.05;
        let r = effective_ie_check(&v, &perturbed(d), 3).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let p = 1.0 / phi + d;
        // stationary π0 = 1/(2−p); h = π0·H(p)
        let pi0 = 1.0 / (2.0 - p);
        let h = -pi0 * (p * p.ln() + (1.0 - p) * (1.0 - p).ln());
        assert!((r.entropy_gap - (phi.ln() - h)).abs() < 1e-12);
        assert!(r.entropy_gap > 0.0 && r.max_cylinder_gap > 0.0 && r.holds);
        let parry0 = phi * phi / (phi * phi + 1.0);
        assert!(r.max_cylinder_gap >= (pi0 - parry0).abs() - 1e-12);
    }

    #[test]
    fn gap_scales_like_square_root_of_entropy_gap() {
        let v = golden();
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for i in 1..=10 {
            let r = effective_ie_check(&v, &perturbed(0.01 * i as f64), 2).unwrap();
            xs.push(r.entropy_gap.ln());
            ys.push(r.max_cylinder_gap.ln());
        }
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!((0.4..=0.6).contains(&slope), "{slope}");
    }
}
