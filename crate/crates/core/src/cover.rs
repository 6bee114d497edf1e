//! SFT covers of subshifts presented by bounded-horizon language oracles,
//! and scanners for language, entropy and period stability.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bounds::{cover_drop_bound, Xi_log};
use crate::constructions::stages::{build_stage_oracle, StageConfig};
use crate::constructions::sturmian::{sturmian_letters, QuadIrrational, SturmianParams, FACTOR_SLIDE_CAP};
use crate::constructions::reference_sft;
use crate::error::{Error, Result};
use crate::sft::automaton::PatternAutomaton;
use crate::sft::{PeriodicOrbit, SftSpec, VertexShift};
use crate::spectral::{scc_entropy, sft_entropy, PowerOptions};
use crate::words::{lyndon_words, occurs_cyclically, parse_alphabet, Alphabet, ForbiddenSet, Word};

pub const DEFAULT_HORIZON: usize = 32;
/// Cap on admissible words kept per level when enumerating minimal forbidden words.
pub const LEVEL_CAP: usize = 1 << 20;
/// Cap on `|L_m(X_m)|` when it is counted for `Ξ`.
pub const COUNT_CAP: u64 = 1 << 22;
/// Entropy differences at or below this are treated as zero.
pub const DROP_TOL: f64 = 1e-10;
/// State cap for the recoded graphs used when replaying certificates.
pub const REPLAY_STATE_CAP: usize = 1 << 16;

pub type MemberFn = dyn Fn(&[u8]) -> bool + Send + Sync;

#[derive(Clone)]
enum Kind {
    /// Exact language of an SFT.
    Sft(Arc<PatternAutomaton>),
    /// Words avoiding a finite set.
    Avoidance(Arc<PatternAutomaton>, ForbiddenSet),
    /// Factors of a mechanical word, indexed by length.
    Sturmian(Arc<Vec<HashSet<Vec<u8>>>>),
    /// `base × full shift on copies letters`; letter `a·copies + b`.
    Product { base: Box<SubshiftOracle>, copies: usize },
    Custom(Arc<MemberFn>),
}

/// A factor-closed admissibility predicate, trusted up to `horizon`.
#[derive(Clone)]
pub struct SubshiftOracle {
    alphabet: Alphabet,
    horizon: usize,
    provenance: String,
    kind: Kind,
}

impl fmt::Debug for SubshiftOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubshiftOracle")
            .field("alphabet", &self.alphabet.to_string())
            .field("horizon", &self.horizon)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl SubshiftOracle {
    /// The language of the SFT `spec`.
    pub fn sft(spec: &SftSpec, horizon: usize, provenance: impl Into<String>) -> Self {
        SubshiftOracle {
            alphabet: spec.alphabet().clone(),
            horizon,
            provenance: provenance.into(),
            kind: Kind::Sft(Arc::new(spec.automaton())),
        }
    }

    /// Words containing no member of `forbidden`. Its minimal forbidden words
    /// are exactly the members of the (minimal) set.
    pub fn avoidance(forbidden: ForbiddenSet, horizon: usize, provenance: impl Into<String>) -> Self {
        SubshiftOracle {
            alphabet: forbidden.alphabet().clone(),
            horizon,
            provenance: provenance.into(),
            kind: Kind::Avoidance(Arc::new(PatternAutomaton::new(&forbidden)), forbidden),
        }
    }

    pub fn golden_mean(horizon: usize) -> Self {
        let spec = SftSpec::from_words(&Alphabet::binary(), &["11"]).expect("valid");
        Self::sft(&spec, horizon, "builtin: golden_mean")
    }

    pub fn full_shift(size: usize, horizon: usize) -> Result<Self> {
        let spec = SftSpec::full(&Alphabet::numeric(size)?);
        Ok(Self::sft(&spec, horizon, format!("builtin: full_shift size={size}")))
    }

    /// Factors of `y`; factor sets for every length up to `horizon` are
    /// collected up front.
    pub fn sturmian(params: SturmianParams, horizon: usize) -> Result<Self> {
        let mut len = 4 * (horizon + 1) + 64;
        let sets = loop {
            let y = sturmian_letters(&params, 1, len as i64)?;
            let sets: Vec<HashSet<Vec<u8>>> = (0..=horizon)
                .map(|n| {
                    if n == 0 {
                        HashSet::from([Vec::new()])
                    } else {
                        y.windows(n).map(|w| w.to_vec()).collect()
                    }
                })
                .collect();
            if sets.iter().enumerate().all(|(n, s)| s.len() == n + 1) {
                break sets;
            }
            len *= 2;
            if len > FACTOR_SLIDE_CAP {
                return Err(Error::CapExceeded {
                    what: "factor window slide",
                    cap: FACTOR_SLIDE_CAP,
                });
            }
        };
        let (s, t) = (params.slope, params.intercept);
        Ok(SubshiftOracle {
            alphabet: Alphabet::binary(),
            horizon,
            provenance: format!(
                "builtin: sturmian slope=({},{},{},{}) intercept=({},{},{},{})",
                s.a, s.b, s.c, s.d, t.a, t.b, t.c, t.d
            ),
            kind: Kind::Sturmian(Arc::new(sets)),
        })
    }

    /// Product of `base` with the full shift on `copies` letters. The pair
    /// `(a, b)` is the letter `a·copies + b`.
    pub fn product(base: SubshiftOracle, copies: usize) -> Result<Self> {
        if copies == 0 {
            return Err(Error::InvalidArgument("copies must be positive".into()));
        }
        let alphabet = Alphabet::numeric(base.alphabet.size() * copies)?;
        Ok(SubshiftOracle {
            alphabet,
            horizon: base.horizon,
            provenance: format!("product({}) x full_shift size={copies}", base.provenance),
            kind: Kind::Product {
                base: Box::new(base),
                copies,
            },
        })
    }

    /// An arbitrary predicate. Factor-closure is spot-checked on every word
    /// of length at most `min(horizon, 6)` (fewer when the alphabet is large).
    pub fn custom(
        alphabet: Alphabet,
        horizon: usize,
        provenance: impl Into<String>,
        member: impl Fn(&[u8]) -> bool + Send + Sync + 'static,
    ) -> Result<Self> {
        let oracle = SubshiftOracle {
            alphabet,
            horizon,
            provenance: provenance.into(),
            kind: Kind::Custom(Arc::new(member)),
        };
        let k = oracle.alphabet.size();
        let mut depth = 0;
        while depth < horizon.min(6) && k.pow(depth as u32 + 1) <= 1 << 14 {
            depth += 1;
        }
        for n in 1..=depth {
            for w in oracle.alphabet.all_words(n) {
                if oracle.member_unchecked(&w)
                    && !(oracle.member_unchecked(&w[1..]) && oracle.member_unchecked(&w[..n - 1]))
                {
                    return Err(Error::NotFactorClosed {
                        word: oracle.alphabet.render(&w),
                    });
                }
            }
        }
        Ok(oracle)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Same oracle with a different horizon.
    pub fn with_horizon(mut self, horizon: usize) -> Result<Self> {
        if let Kind::Sturmian(sets) = &self.kind {
            if horizon >= sets.len() {
                return Err(Error::HorizonExceeded {
                    len: horizon,
                    horizon: sets.len() - 1,
                });
            }
        }
        if let Kind::Product { base, .. } = &mut self.kind {
            let b = (**base).clone().with_horizon(horizon)?;
            **base = b;
        }
        self.horizon = horizon;
        Ok(self)
    }

    pub fn member(&self, w: &[u8]) -> Result<bool> {
        if w.len() > self.horizon {
            return Err(Error::HorizonExceeded {
                len: w.len(),
                horizon: self.horizon,
            });
        }
        self.alphabet.check(w)?;
        Ok(self.member_unchecked(w))
    }

    /// Member words of length `n`, lexicographically ordered.
    pub fn language_slice(&self, n: usize, cap: usize) -> Result<Vec<Word>> {
        if n > self.horizon {
            return Err(Error::HorizonExceeded {
                len: n,
                horizon: self.horizon,
            });
        }
        let k = self.alphabet.size() as u8;
        let mut level: Vec<Vec<u8>> = vec![Vec::new()];
        for _ in 0..n {
            let mut next = Vec::new();
            for w in &level {
                for a in 0..k {
                    let mut x = w.clone();
                    x.push(a);
                    if self.member_unchecked(&x) {
                        next.push(x);
                    }
                }
                if next.len() > cap {
                    return Err(Error::CapExceeded {
                        what: "language slice",
                        cap,
                    });
                }
            }
            level = next;
        }
        Ok(level.into_iter().map(Word::new).collect())
    }

    fn member_unchecked(&self, w: &[u8]) -> bool {
        match &self.kind {
            Kind::Sft(aut) => aut.contains(w),
            Kind::Avoidance(aut, _) => aut.avoids(w),
            Kind::Sturmian(sets) => sets[w.len()].contains(w),
            Kind::Product { base, copies } => {
                let proj: Vec<u8> = w.iter().map(|&l| l / *copies as u8).collect();
                base.member_unchecked(&proj)
            }
            Kind::Custom(f) => f(w),
        }
    }

    /// Minimal forbidden words of length at most `n`, ordered by length and
    /// then lexicographically.
    fn minimal_forbidden(&self, n: usize) -> Result<Vec<Word>> {
        if n > self.horizon {
            return Err(Error::HorizonExceeded {
                len: n,
                horizon: self.horizon,
            });
        }
        let mut out = match &self.kind {
            Kind::Avoidance(_, f) => f.truncated(n).words().cloned().collect(),
            Kind::Sft(aut) => sft_minimal_words(aut, n, LEVEL_CAP)?,
            Kind::Product { base, copies } => {
                let mut out = Vec::new();
                for f in base.minimal_forbidden(n)? {
                    lift(&f, *copies, &mut out, LEVEL_CAP)?;
                }
                out
            }
            Kind::Sturmian(_) | Kind::Custom(_) => self.level_minimal_words(n, LEVEL_CAP)?,
        };
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(out)
    }

    /// Level-by-level enumeration over one-letter extensions of admissible words.
    fn level_minimal_words(&self, n: usize, cap: usize) -> Result<Vec<Word>> {
        let k = self.alphabet.size() as u8;
        let mut out = Vec::new();
        let mut level: Vec<Vec<u8>> = vec![Vec::new()];
        let mut known: HashSet<Vec<u8>> = HashSet::from([Vec::new()]);
        for _ in 1..=n {
            let mut next = Vec::new();
            for w in &level {
                for a in 0..k {
                    let mut x = w.clone();
                    x.push(a);
                    if !known.contains(&x[1..]) {
                        continue;
                    }
                    if self.member_unchecked(&x) {
                        next.push(x);
                    } else {
                        out.push(Word::new(x));
                    }
                }
                if next.len() > cap {
                    return Err(Error::CapExceeded {
                        what: "admissible words per level",
                        cap,
                    });
                }
            }
            known = next.iter().cloned().collect();
            level = next;
        }
        Ok(out)
    }
}

/// All words over `copies`-fold product letters projecting onto `f`.
fn lift(f: &[u8], copies: usize, out: &mut Vec<Word>, cap: usize) -> Result<()> {
    let mut current: Vec<Vec<u8>> = vec![Vec::new()];
    for &a in f {
        let mut next = Vec::with_capacity(current.len() * copies);
        for w in &current {
            for b in 0..copies {
                let mut x = w.clone();
                x.push((a as usize * copies + b) as u8);
                next.push(x);
            }
        }
        if next.len() + out.len() > cap {
            return Err(Error::CapExceeded {
                what: "lifted forbidden words",
                cap,
            });
        }
        current = next;
    }
    out.extend(current.into_iter().map(Word::new));
    Ok(())
}

/// Minimal forbidden words of an SFT language: `a·u·b` with `a·u` and `u·b`
/// in the language but not `a·u·b`. Tracked by the core-state sets reached
/// on `u` and on each `a·u`; once every nonempty `a·u` set equals the `u`
/// set, no extension of `u` can contribute and the branch is cut.
fn sft_minimal_words(aut: &PatternAutomaton, n: usize, cap: usize) -> Result<Vec<Word>> {
    let k = aut.alphabet_size() as u8;
    let core = aut.core().to_vec();
    let mut out = Vec::new();
    if n == 0 || core.is_empty() {
        if n >= 1 && core.is_empty() {
            out.extend((0..k).map(|a| Word::new(vec![a])));
        }
        return Ok(out);
    }
    for a in 0..k {
        if aut.step_set(&core, a).is_empty() {
            out.push(Word::new(vec![a]));
        }
    }
    let first: Vec<Vec<usize>> = (0..k).map(|a| aut.step_set(&core, a)).collect();
    let mut stack: Vec<(Vec<u8>, Vec<usize>, Vec<Vec<usize>>)> = vec![(Vec::new(), core, first)];
    let mut visited = 0usize;
    while let Some((u, s, t)) = stack.pop() {
        if u.len() + 2 > n || t.iter().all(|ta| ta.is_empty() || *ta == s) {
            continue;
        }
        visited += 1;
        if visited > cap {
            return Err(Error::CapExceeded {
                what: "language words visited",
                cap,
            });
        }
        for b in 0..k {
            let sb = aut.step_set(&s, b);
            if sb.is_empty() {
                continue;
            }
            let tb: Vec<Vec<usize>> = t
                .iter()
                .map(|ta| if ta.is_empty() { Vec::new() } else { aut.step_set(ta, b) })
                .collect();
            for a in 0..k {
                if !t[a as usize].is_empty() && tb[a as usize].is_empty() {
                    let mut w = Vec::with_capacity(u.len() + 2);
                    w.push(a);
                    w.extend_from_slice(&u);
                    w.push(b);
                    out.push(Word::new(w));
                }
            }
            if u.len() + 3 <= n {
                let mut ub = u.clone();
                ub.push(b);
                stack.push((ub, sb, tb));
            }
        }
    }
    Ok(out)
}

/// Stage `X_n` of the cover.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverStage {
    pub n: usize,
    pub spec: SftSpec,
}

/// Cover stages `X_1 … X_{n_max}` of an oracle, sharing one enumeration of
/// minimal forbidden words.
#[derive(Clone, Debug)]
pub struct Cover<'a> {
    oracle: &'a SubshiftOracle,
    n_max: usize,
    minimal: Vec<Word>,
}

impl<'a> Cover<'a> {
    pub fn new(oracle: &'a SubshiftOracle, n_max: usize) -> Result<Self> {
        let minimal = oracle.minimal_forbidden(n_max)?;
        Ok(Cover {
            oracle,
            n_max,
            minimal,
        })
    }

    pub fn oracle(&self) -> &SubshiftOracle {
        self.oracle
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.n_max {
            return Err(Error::HorizonExceeded {
                len: n,
                horizon: self.n_max,
            });
        }
        Ok(())
    }

    /// Minimal forbidden words of length exactly `len`.
    pub fn minimal_of_length(&self, len: usize) -> &[Word] {
        let lo = self.minimal.partition_point(|w| w.len() < len);
        let hi = self.minimal.partition_point(|w| w.len() <= len);
        &self.minimal[lo..hi]
    }

    pub fn forbidden_up_to(&self, n: usize) -> Result<ForbiddenSet> {
        self.check(n)?;
        let end = self.minimal.partition_point(|w| w.len() <= n);
        ForbiddenSet::new(&self.oracle.alphabet, self.minimal[..end].iter().cloned())
    }

    pub fn stage(&self, n: usize) -> Result<CoverStage> {
        if n == 0 {
            return Err(Error::InvalidArgument("stages start at n = 1".into()));
        }
        Ok(CoverStage {
            n,
            spec: SftSpec::new(self.forbidden_up_to(n)?),
        })
    }

    /// `X_n = X_{n+j}`: no minimal forbidden word of length in `(n, n+j]`
    /// lies in the language of `X_n`.
    pub fn stage_equal(&self, n: usize, j: usize) -> Result<bool> {
        self.check(n + j)?;
        let aut = self.stage(n)?.spec.automaton();
        Ok((n + 1..=n + j).all(|len| self.minimal_of_length(len).iter().all(|w| !aut.contains(w))))
    }

    /// Lengths `L ≤ n_max` with `X_{L−1} ≠ X_L`.
    pub fn breaks(&self) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for len in 2..=self.n_max {
            if !self.stage_equal(len - 1, 1)? {
                out.push(len);
            }
        }
        Ok(out)
    }
}

pub fn forbidden_up_to(oracle: &SubshiftOracle, n: usize) -> Result<ForbiddenSet> {
    Cover::new(oracle, n)?.forbidden_up_to(n)
}

pub fn cover_stage(oracle: &SubshiftOracle, n: usize) -> Result<CoverStage> {
    Cover::new(oracle, n)?.stage(n)
}

pub fn stage_equal(oracle: &SubshiftOracle, n: usize, j: usize) -> Result<bool> {
    Cover::new(oracle, n + j)?.stage_equal(n, j)
}

/// Literal form of stage equality: every word of length `n + j` in the
/// language of `X_n` is accepted by the oracle.
pub fn stage_equal_by_slice(oracle: &SubshiftOracle, n: usize, j: usize, cap: usize) -> Result<bool> {
    let stage = cover_stage(oracle, n)?;
    for w in stage.spec.language_slice(n + j, cap)? {
        if !oracle.member(&w)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageScan {
    pub horizon: usize,
    /// `(n, largest j with X_n = X_{n+j} and n + j ≤ horizon)`
    pub rows: Vec<(usize, usize)>,
    /// Lengths `L` with `X_{L−1} ≠ X_L`.
    pub breaks: Vec<usize>,
}

pub fn language_stability_scan(oracle: &SubshiftOracle, horizon: usize) -> Result<LanguageScan> {
    let cover = Cover::new(oracle, horizon)?;
    let breaks = cover.breaks()?;
    let rows = (1..=horizon)
        .map(|n| {
            let next = breaks.iter().find(|&&b| b > n).copied();
            (n, next.map_or(horizon - n, |b| b - 1 - n))
        })
        .collect();
    Ok(LanguageScan {
        horizon,
        rows,
        breaks,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyRow {
    pub m: usize,
    pub j: usize,
    pub h_m: f64,
    pub h_m_plus_j: f64,
    /// `h_m − h_{m+j}`, zero when within `DROP_TOL`.
    pub drop: f64,
    /// `|L_m(X_m)|`, the state count of the order-`m` presentation; `None`
    /// past `COUNT_CAP`.
    pub s_m: Option<u64>,
    pub xi_log: Option<f64>,
    /// `drop < Ξ`. Without `s_m` only a zero drop is accepted.
    pub verdict: bool,
    pub stages_equal: bool,
    /// `ln` of the guaranteed drop when the stages differ.
    pub cover_drop_log: Option<f64>,
    pub cover_drop_ok: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyScan {
    pub eps: f64,
    pub ell: u64,
    pub j: usize,
    pub horizon: usize,
    pub rows: Vec<EntropyRow>,
}

fn stage_entropy(spec: &SftSpec, opts: PowerOptions) -> Result<f64> {
    match sft_entropy(spec, opts) {
        Err(Error::EmptyShift) => Ok(0.0),
        r => r,
    }
}

pub fn entropy_stability_scan(
    oracle: &SubshiftOracle,
    eps: f64,
    ell: u64,
    j: usize,
    horizon: usize,
) -> Result<EntropyScan> {
    if j == 0 || horizon <= j {
        return Err(Error::InvalidArgument("need 1 ≤ j < horizon".into()));
    }
    let opts = PowerOptions::default();
    let cover = Cover::new(oracle, horizon)?;
    let a = oracle.alphabet.size() as u64;
    let entropies = (1..=horizon)
        .map(|n| stage_entropy(&cover.stage(n)?.spec, opts))
        .collect::<Result<Vec<f64>>>()?;
    let mut rows = Vec::new();
    for m in 1..=horizon - j {
        let (h_m, h_mj) = (entropies[m - 1], entropies[m + j - 1]);
        let raw = h_m - h_mj;
        let drop = if raw.abs() <= DROP_TOL { 0.0 } else { raw };
        let s_m = cover.stage(m)?.spec.automaton().count_slice(m, COUNT_CAP);
        let xi_log = match s_m {
            Some(s) if s >= 2 => Some(Xi_log(eps, ell, j as u64, s)?),
            _ => None,
        };
        let verdict = drop == 0.0 || xi_log.is_some_and(|x| drop > 0.0 && drop.ln() < x);
        let stages_equal = cover.stage_equal(m, j)?;
        let (cover_drop_log, cover_drop_ok) = match (stages_equal, s_m) {
            (false, Some(s)) if a >= 2 && s >= 1 => {
                let b = cover_drop_bound(s, j as u64 + 1, a)?;
                (Some(b), Some(drop > 0.0 && drop.ln() >= b))
            }
            _ => (None, None),
        };
        rows.push(EntropyRow {
            m,
            j,
            h_m,
            h_m_plus_j: h_mj,
            drop,
            s_m,
            xi_log,
            verdict,
            stages_equal,
            cover_drop_log,
            cover_drop_ok,
        });
    }
    Ok(EntropyScan {
        eps,
        ell,
        j,
        horizon,
        rows,
    })
}

/// Periodic orbits of `spec` of minimal period `p`.
fn stage_orbits(spec: &SftSpec, p: usize) -> Vec<PeriodicOrbit> {
    spec.periodic_orbits(p)
}

/// First `(n, p)`, scanning `p` in the outer loop, with
/// `℘_p(X_n) = ℘_p(X_{n+m})` and both sets nonempty.
pub fn period_stability_scan(
    oracle: &SubshiftOracle,
    m: usize,
    n_max: usize,
    p_max: usize,
) -> Result<Option<StabilityCertificate>> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be positive".into()));
    }
    let cover = Cover::new(oracle, n_max + m)?;
    let mut specs: HashMap<usize, SftSpec> = HashMap::new();
    let mut orbits: HashMap<(usize, usize), Vec<PeriodicOrbit>> = HashMap::new();
    let mut get = |n: usize, p: usize| -> Result<Vec<PeriodicOrbit>> {
        if let Some(o) = orbits.get(&(n, p)) {
            return Ok(o.clone());
        }
        if let std::collections::hash_map::Entry::Vacant(e) = specs.entry(n) {
            e.insert(cover.stage(n)?.spec);
        }
        let o = stage_orbits(&specs[&n], p);
        orbits.insert((n, p), o.clone());
        Ok(o)
    };
    for p in 1..=p_max {
        for n in 1..=n_max {
            let low = get(n, p)?;
            if low.is_empty() {
                continue;
            }
            if low == get(n + m, p)? {
                let alphabet = oracle.alphabet.clone();
                return Ok(Some(StabilityCertificate::new(
                    &cover,
                    n,
                    n + m,
                    Witness::Period {
                        m,
                        n,
                        p,
                        orbits: low.iter().map(|o| o.display(&alphabet)).collect(),
                        nonempty: true,
                    },
                )?));
            }
        }
    }
    Ok(None)
}

/// Certificate for `℘_p(X_n) = ℘_p(X_{n+m})` at one given `(n, p)`, if the
/// sets agree and are nonempty.
pub fn period_certificate(
    oracle: &SubshiftOracle,
    m: usize,
    n: usize,
    p: usize,
) -> Result<Option<StabilityCertificate>> {
    if m == 0 || n == 0 || p == 0 {
        return Err(Error::InvalidArgument("m, n and p must be positive".into()));
    }
    let cover = Cover::new(oracle, n + m)?;
    let low = stage_orbits(&cover.stage(n)?.spec, p);
    if low.is_empty() || low != stage_orbits(&cover.stage(n + m)?.spec, p) {
        return Ok(None);
    }
    let witness = Witness::Period {
        m,
        n,
        p,
        orbits: low.iter().map(|o| o.display(&oracle.alphabet)).collect(),
        nonempty: true,
    };
    Ok(Some(StabilityCertificate::new(&cover, n, n + m, witness)?))
}

/// Certificate for `X_n = X_{n+j}`, if it holds.
pub fn language_certificate(oracle: &SubshiftOracle, n: usize, j: usize) -> Result<Option<StabilityCertificate>> {
    let cover = Cover::new(oracle, n + j)?;
    if !cover.stage_equal(n, j)? {
        return Ok(None);
    }
    Ok(Some(StabilityCertificate::new(
        &cover,
        n,
        n + j,
        Witness::Language {
            n,
            j,
            equality_horizon: n + j,
        },
    )?))
}

/// Certificate for one entropy-scan row whose verdict holds.
pub fn entropy_certificate(
    oracle: &SubshiftOracle,
    scan: &EntropyScan,
    row: &EntropyRow,
) -> Result<Option<StabilityCertificate>> {
    if !row.verdict {
        return Ok(None);
    }
    let cover = Cover::new(oracle, row.m + row.j)?;
    Ok(Some(StabilityCertificate::new(
        &cover,
        row.m,
        row.m + row.j,
        Witness::Entropy {
            m: row.m,
            j: row.j,
            eps: scan.eps,
            ell: scan.ell,
            h_low: row.h_m,
            h_high: row.h_m_plus_j,
            drop: row.drop,
            xi_log: row.xi_log,
            s_m: row.s_m,
            verdict: row.verdict,
        },
    )?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub n: usize,
    pub forbidden: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Witness {
    Language {
        n: usize,
        j: usize,
        equality_horizon: usize,
    },
    Entropy {
        m: usize,
        j: usize,
        eps: f64,
        ell: u64,
        h_low: f64,
        h_high: f64,
        drop: f64,
        xi_log: Option<f64>,
        s_m: Option<u64>,
        verdict: bool,
    },
    Period {
        m: usize,
        n: usize,
        p: usize,
        orbits: Vec<String>,
        /// Empty witness sets are never issued; kept explicit in the JSON.
        nonempty: bool,
    },
}

/// A stability statement about two cover stages, carrying both stages'
/// forbidden words so that it can be replayed without the oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityCertificate {
    pub schema: u32,
    pub oracle: String,
    pub alphabet: String,
    pub low: StageRecord,
    pub high: StageRecord,
    pub witness: Witness,
}

/// Outcome of replaying a certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub passed: bool,
    pub failures: Vec<String>,
}

impl StabilityCertificate {
    fn new(cover: &Cover<'_>, low: usize, high: usize, witness: Witness) -> Result<Self> {
        let alphabet = cover.oracle.alphabet.clone();
        let record = |n: usize| -> Result<StageRecord> {
            Ok(StageRecord {
                n,
                forbidden: cover
                    .forbidden_up_to(n)?
                    .sorted()
                    .into_iter()
                    .map(|w| w.display(&alphabet))
                    .collect(),
            })
        };
        Ok(StabilityCertificate {
            schema: 1,
            oracle: cover.oracle.provenance.clone(),
            alphabet: alphabet.to_string(),
            low: record(low)?,
            high: record(high)?,
            witness,
        })
    }

    pub fn kind(&self) -> &'static str {
        match self.witness {
            Witness::Language { .. } => "language",
            Witness::Entropy { .. } => "entropy",
            Witness::Period { .. } => "period",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    fn stage_spec(&self, alphabet: &Alphabet, rec: &StageRecord) -> Result<SftSpec> {
        let words = rec
            .forbidden
            .iter()
            .map(|w| alphabet.parse_word(w))
            .collect::<Result<Vec<_>>>()?;
        Ok(SftSpec::new(ForbiddenSet::new(alphabet, words)?))
    }

    /// Replay from the embedded stages by routes other than the ones that
    /// produced the certificate: slices, entropies and orbits come from the
    /// recoded vertex shift when it fits `REPLAY_STATE_CAP`. Orbits otherwise
    /// come from direct cyclic matching, without the automaton. With an
    /// oracle, the embedded stages are also checked against it.
    pub fn verify(&self, oracle: Option<&SubshiftOracle>) -> Result<CertificateCheck> {
        let alphabet = parse_alphabet(&self.alphabet)?;
        let low = self.stage_spec(&alphabet, &self.low)?;
        let high = self.stage_spec(&alphabet, &self.high)?;
        let mut failures = Vec::new();
        if self.schema != 1 {
            failures.push(format!("unsupported schema {}", self.schema));
        }
        if let Some(o) = oracle {
            let cover = Cover::new(o, self.high.n)?;
            for (rec, spec) in [(&self.low, &low), (&self.high, &high)] {
                if cover.forbidden_up_to(rec.n)? != *spec.forbidden() {
                    failures.push(format!("stage {} differs from the oracle's cover", rec.n));
                }
            }
        }
        let opts = PowerOptions::default();
        match &self.witness {
            Witness::Language {
                n,
                j,
                equality_horizon,
            } => {
                if *equality_horizon != n + j || self.low.n != *n || self.high.n != n + j {
                    failures.push("inconsistent stage indices".into());
                }
                let len = n + j;
                if replay_slice(&low, len)? != replay_slice(&high, len)? {
                    failures.push(format!("slices of length {len} differ"));
                }
            }
            Witness::Entropy {
                m,
                j,
                eps,
                ell,
                h_low,
                h_high,
                drop,
                xi_log,
                s_m,
                verdict,
            } => {
                if self.low.n != *m || self.high.n != m + j {
                    failures.push("inconsistent stage indices".into());
                }
                let (a, b) = (replay_entropy(&low, opts)?, replay_entropy(&high, opts)?);
                if (a - h_low).abs() > 1e-9 || (b - h_high).abs() > 1e-9 {
                    failures.push(format!("entropies replay to {a} and {b}"));
                }
                let d = if (a - b).abs() <= DROP_TOL { 0.0 } else { a - b };
                if (d - drop).abs() > 1e-9 {
                    failures.push(format!("drop replays to {d}"));
                }
                let xi = match s_m {
                    Some(s) if *s >= 2 => Some(Xi_log(*eps, *ell, *j as u64, *s)?),
                    _ => None,
                };
                if xi != *xi_log {
                    failures.push("threshold does not replay".into());
                }
                let v = d == 0.0 || xi.is_some_and(|x| d > 0.0 && d.ln() < x);
                if !v || !verdict {
                    failures.push("verdict does not hold".into());
                }
            }
            Witness::Period {
                m,
                n,
                p,
                orbits,
                nonempty,
            } => {
                if self.low.n != *n || self.high.n != n + m {
                    failures.push("inconsistent stage indices".into());
                }
                let lo = replay_orbits(&low, *p)?;
                let hi = replay_orbits(&high, *p)?;
                let shown: Vec<String> = lo.iter().map(|o| o.display(&alphabet)).collect();
                if lo.is_empty() || !nonempty {
                    failures.push("witness set is empty".into());
                }
                if &shown != orbits {
                    failures.push("low stage orbits differ from the witness".into());
                }
                if lo != hi {
                    failures.push("stage orbit sets differ".into());
                }
            }
        }
        Ok(CertificateCheck {
            passed: failures.is_empty(),
            failures,
        })
    }
}

fn replay_shift(spec: &SftSpec) -> Option<VertexShift> {
    spec.recode(spec.default_order(), REPLAY_STATE_CAP).ok()
}

fn replay_slice(spec: &SftSpec, len: usize) -> Result<Vec<Word>> {
    let cap = 1 << 22;
    match replay_shift(spec) {
        Some(v) if v.order() <= len => v.language_slice(len, cap),
        _ => spec.language_slice(len, cap),
    }
}

fn replay_entropy(spec: &SftSpec, opts: PowerOptions) -> Result<f64> {
    match replay_shift(spec) {
        Some(v) => scc_entropy(v.graph(), opts),
        None => stage_entropy(spec, opts),
    }
    .or_else(|e| if e == Error::EmptyShift { Ok(0.0) } else { Err(e) })
}

fn replay_orbits(spec: &SftSpec, p: usize) -> Result<Vec<PeriodicOrbit>> {
    match replay_shift(spec) {
        Some(v) => v.enumerate_min_periodic(p, 1 << 22),
        None => {
            let words: Vec<&Word> = spec.forbidden().words().collect();
            lyndon_words(spec.alphabet().size(), p)
                .into_iter()
                .filter(|c| words.iter().all(|f| !occurs_cyclically(f, c)))
                .map(|c| PeriodicOrbit::of(&c))
                .collect()
        }
    }
}

/// Parses an oracle file. Either a builtin:
///
/// ```text
/// builtin: sturmian
/// horizon: 24
/// slope: 3 -1 2 5
/// ```
///
/// or an explicit SFT:
///
/// ```text
/// alphabet: 0 1
/// horizon: 20
/// forbidden:
/// 11
/// ```
pub fn parse_oracle(text: &str) -> Result<SubshiftOracle> {
    let mut keys: Vec<(String, String, usize)> = Vec::new();
    let mut words: Vec<(String, usize, usize)> = Vec::new();
    let mut in_block = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let column = content.find(trimmed).unwrap_or(0) + 1;
        if in_block {
            words.push((trimmed.to_string(), line, column));
            continue;
        }
        let (key, value) = trimmed.split_once(':').ok_or_else(|| Error::Parse {
            line,
            column,
            message: "expected `key: value`".into(),
        })?;
        let key = key.trim().to_string();
        if key == "forbidden" {
            in_block = true;
        } else {
            keys.push((key, value.trim().to_string(), line));
        }
    }
    let get = |k: &str| keys.iter().find(|(key, _, _)| key == k);
    let parse_err = |line: usize, message: String| Error::Parse {
        line,
        column: 1,
        message,
    };
    let num = |k: &str, default: usize| -> Result<usize> {
        match get(k) {
            None => Ok(default),
            Some((_, v, line)) => v
                .parse()
                .map_err(|_| parse_err(*line, format!("`{k}` must be a non-negative integer"))),
        }
    };
    let horizon = num("horizon", DEFAULT_HORIZON)?;
    if let Some((_, name, line)) = get("builtin") {
        if in_block || get("alphabet").is_some() {
            return Err(parse_err(*line, "builtin oracles take no alphabet or forbidden block".into()));
        }
        let params: HashMap<String, String> = keys
            .iter()
            .filter(|(k, _, _)| k != "builtin")
            .map(|(k, v, _)| (k.clone(), v.clone()))
            .collect();
        return builtin_oracle(name, &params, get("horizon").map(|_| horizon))
            .map_err(|e| match e {
                Error::Parse { .. } => e,
                other => parse_err(*line, other.to_string()),
            });
    }
    let (_, alpha, line) = get("alphabet").ok_or_else(|| parse_err(1, "missing `builtin:` or `alphabet:`".into()))?;
    let alphabet = parse_alphabet(alpha).map_err(|e| parse_err(*line, e.to_string()))?;
    let mut parsed = Vec::new();
    for (w, line, column) in words {
        let mut letters = Vec::new();
        for (j, c) in w.chars().enumerate() {
            letters.push(alphabet.index_of(c).ok_or(Error::Parse {
                line,
                column: column + j,
                message: format!("unknown symbol {c:?}"),
            })?);
        }
        parsed.push(Word::new(letters));
    }
    let forbidden = ForbiddenSet::new(&alphabet, parsed)?;
    let label = format!("forbidden: {}", forbidden.sorted().iter().map(|w| w.display(&alphabet)).collect::<Vec<_>>().join(","));
    Ok(SubshiftOracle::sft(&SftSpec::new(forbidden), horizon, label))
}

pub fn parse_quad(text: &str) -> Result<QuadIrrational> {
    let v: Vec<i64> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<i64>().map_err(|_| Error::InvalidArgument(format!("bad integer {s:?}"))))
        .collect::<Result<_>>()?;
    match v.as_slice() {
        [a] => Ok(QuadIrrational::integer(*a)),
        [a, b, c, d] => QuadIrrational::new(*a, *b, *c, *d),
        _ => Err(Error::InvalidArgument(format!(
            "expected `a b c d` for (a + b√d)/c, got {text:?}"
        ))),
    }
}

/// Named oracles: `golden_mean`, `full_shift` (`size`), `h1`, `h2`, `h3`,
/// `sturmian` (`slope`, `intercept`), `x3_stage` (stage parameters) and
/// `product` (`base`, `copies`).
pub fn builtin_oracle(
    name: &str,
    params: &HashMap<String, String>,
    horizon: Option<usize>,
) -> Result<SubshiftOracle> {
    let h = horizon.unwrap_or(DEFAULT_HORIZON);
    let num = |k: &str, default: usize| -> Result<usize> {
        params.get(k).map_or(Ok(default), |v| {
            v.parse()
                .map_err(|_| Error::InvalidArgument(format!("`{k}` must be a non-negative integer")))
        })
    };
    match name {
        "golden_mean" => Ok(SubshiftOracle::golden_mean(h)),
        "full_shift" => SubshiftOracle::full_shift(num("size", 2)?, h),
        "h1" | "h2" | "h3" => Ok(SubshiftOracle::sft(&reference_sft(name)?, h, format!("builtin: {name}"))),
        "sturmian" => {
            let d = SturmianParams::default();
            let slope = params.get("slope").map_or(Ok(d.slope), |s| parse_quad(s))?;
            let intercept = params.get("intercept").map_or(Ok(d.intercept), |s| parse_quad(s))?;
            SubshiftOracle::sturmian(SturmianParams::new(slope, intercept)?, h)
        }
        "x3_stage" => {
            let d = StageConfig::default();
            let cfg = StageConfig {
                n1: num("n1", d.n1)?,
                n11: num("n11", d.n11)?,
                n00: num("n00", d.n00)?,
                n000: num("n000", d.n000)?,
                mult: num("mult", d.mult)?,
                period_cap: num("period_cap", d.period_cap)?,
                horizon,
                ..d
            };
            Ok(build_stage_oracle(&cfg)?.oracle())
        }
        "product" => {
            let base_name = params.get("base").map_or("golden_mean", |s| s.as_str());
            if base_name == "product" {
                return Err(Error::InvalidArgument("nested products are not supported".into()));
            }
            let mut rest = params.clone();
            rest.remove("base");
            rest.remove("copies");
            let base = builtin_oracle(base_name, &rest, horizon)?;
            SubshiftOracle::product(base, num("copies", 2)?)
        }
        other => Err(Error::InvalidArgument(format!("unknown builtin oracle {other:?}"))),
    }
}
