//! Finite stages of the period-stable, non-language-stable construction:
//! Type I words `u_n`, and Type II words eliminating periodic points in
//! three families (through `11`, through `00` without `000`, through `000`).

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cover::SubshiftOracle;
use crate::error::{Error, Result};
use crate::sft::automaton::PatternAutomaton;
use crate::sft::SftSpec;
use crate::spectral::{sft_entropy, PowerOptions};
use crate::words::{occurs_cyclically, Alphabet, ForbiddenSet, Word};

use super::reference_sft;
use super::sturmian::{factor_absent, sturmian_letters, type1_word, QuadIrrational, SturmianParams};

/// Upper limit on repetition exponents tried for one Type II word.
pub const POWER_CAP: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `u_n = 111·y(1…4n)·111`
    TypeI,
    /// `z_i = v_i^{mult·k_i}·11`
    W11,
    /// `α_i = w_i^{mult·ℓ_i}·00`
    W00,
    /// `β_i = x_i^{mult·s_i}`; `β_0 = (01)^{mult·k}`
    W000,
}

impl Family {
    /// The pattern each eliminated orbit must contain.
    pub fn pattern(self) -> Word {
        match self {
            Family::TypeI => Word::binary("111"),
            Family::W11 => Word::binary("11"),
            Family::W00 => Word::binary("00"),
            Family::W000 => Word::binary("000"),
        }
    }

    /// Suffix appended after the repeated block.
    pub fn suffix(self) -> Word {
        match self {
            Family::W11 => Word::binary("11"),
            Family::W00 => Word::binary("00"),
            _ => Word::empty(),
        }
    }

    /// Words an eliminated orbit must not contain.
    pub fn excluded(self) -> Vec<Word> {
        match self {
            Family::W00 => vec![Word::binary("000"), Word::binary("11")],
            Family::W000 => vec![Word::binary("11")],
            _ => Vec::new(),
        }
    }
}

/// One emitted forbidden word with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub family: Family,
    /// `n` for `u_n`; `i` for `z_i`, `α_i`, `β_i`.
    pub index: usize,
    pub word: String,
    pub length: usize,
    /// `v`, `w` or `x`.
    pub base: Option<String>,
    /// `k`, `ℓ` or `s`.
    pub power: Option<usize>,
    pub mult: Option<usize>,
    /// Canonical representative of the eliminated orbit.
    pub orbit: Option<String>,
    /// Finite-horizon stand-in for `N`; heuristic.
    pub n_heuristic: Option<usize>,
    /// `h(H_3(t))` and the floor it had to clear, for `β` words.
    pub reference_entropy: Option<f64>,
    pub entropy_floor: Option<f64>,
}

impl LedgerEntry {
    fn type1(n: usize, u: &Word) -> Self {
        LedgerEntry {
            family: Family::TypeI,
            index: n,
            word: u.display(&Alphabet::binary()),
            length: u.len(),
            base: None,
            power: None,
            mult: None,
            orbit: None,
            n_heuristic: None,
            reference_entropy: None,
            entropy_floor: None,
        }
    }

    pub fn letters(&self) -> Result<Word> {
        Alphabet::binary().parse_word(&self.word)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageConfig {
    pub params: SturmianParams,
    /// Type I words `u_1 … u_{n1}` carried by the oracle.
    pub n1: usize,
    pub n11: usize,
    pub n00: usize,
    /// `β_0 … β_{n000−1}`
    pub n000: usize,
    pub mult: usize,
    pub period_cap: usize,
    /// Oracle horizon; defaults to the longest length at which the
    /// truncation is known to agree with the full construction.
    pub horizon: Option<usize>,
}

impl Default for StageConfig {
    fn default() -> Self {
        StageConfig {
            params: SturmianParams::default(),
            n1: 4,
            n11: 2,
            n00: 1,
            n000: 2,
            mult: 100,
            period_cap: 20,
            horizon: None,
        }
    }
}

/// Least-period orbit of `current` containing `pattern` and none of
/// `exclude`, lexicographically least among those, together with its
/// rotation starting with `pattern` (repeated until it literally has the
/// pattern as a prefix).
pub fn find_template(
    current: &SftSpec,
    pattern: &Word,
    exclude: &[Word],
    period_cap: usize,
) -> Option<(Word, Word)> {
    let aut = current.automaton();
    for p in 1..=period_cap {
        let found = crate::words::lyndon_words(current.alphabet().size(), p)
            .into_iter()
            .filter(|c| occurs_cyclically(pattern, c) && exclude.iter().all(|e| !occurs_cyclically(e, c)))
            .find(|c| aut.avoids_cyclically(c));
        if let Some(c) = found {
            let start = (0..p)
                .find(|&i| (0..pattern.len()).all(|j| c[(i + j) % p] == pattern[j]))
                .expect("pattern occurs");
            let v = c.rotate(start).repeat(pattern.len().div_ceil(p));
            return Some((c, v));
        }
    }
    None
}

/// Least `k ≥ 1` with `v^k` absent from `y` and `|v|·k > min_len`.
pub fn least_absent_power(v: &Word, min_len: usize, params: &SturmianParams) -> Result<usize> {
    let mut k = min_len / v.len() + 1;
    k = k.max(1);
    while !factor_absent(&v.repeat(k), params)? {
        k += 1;
        if k > POWER_CAP {
            return Err(Error::CapExceeded {
                what: "repetition exponent",
                cap: POWER_CAP,
            });
        }
    }
    Ok(k)
}

/// `v^{mult·k}·suffix`
pub fn template_word(v: &Word, k: usize, mult: usize, family: Family) -> Word {
    v.repeat(mult * k).concat(&family.suffix())
}

/// Recover `(v, k)` from a Type II word: strip the family suffix, then take
/// the least block length `q ≥ |pattern|` dividing the rest, such that the
/// rest is `q`-periodic, starts with the pattern and repeats a multiple of
/// `mult` times.
pub fn parse_template(word: &Word, family: Family, mult: usize) -> Option<(Word, usize)> {
    let suffix = family.suffix();
    let body = word.strip_suffix(suffix.letters())?;
    let pattern = if word.starts_with(&[0, 1]) && family == Family::W000 {
        Word::binary("01")
    } else {
        family.pattern()
    };
    let len = body.len();
    (pattern.len()..=len).find_map(|q| {
        let ok = len % q == 0
            && (q..len).all(|i| body[i] == body[i - q])
            && body.starts_with(&pattern)
            && (len / q) % mult == 0;
        ok.then(|| (Word::from(&body[..q]), len / q / mult))
    })
}

/// Result of one elimination step.
#[derive(Clone, Debug, PartialEq)]
pub struct Elimination {
    pub orbit: Word,
    pub base: Word,
    pub power: usize,
    pub word: Word,
    pub spec: SftSpec,
}

/// One inductive step: pick the least-period orbit of `current` through the
/// family pattern, rotate it to start with the pattern, take the least power
/// absent from `y` (and longer than `min_len`), and forbid the template word.
pub fn eliminate_periodic_stage(
    current: &SftSpec,
    family: Family,
    mult: usize,
    params: &SturmianParams,
    period_cap: usize,
    min_len: usize,
) -> Result<Elimination> {
    let (orbit, base) = find_template(current, &family.pattern(), &family.excluded(), period_cap)
        .ok_or_else(|| Error::Construction {
            stage: 0,
            message: format!("no orbit through {:?} of period ≤ {period_cap}", family),
        })?;
    let power = least_absent_power(&base, min_len, params)?;
    let word = template_word(&base, power, mult, family);
    let spec = SftSpec::new(current.forbidden().with_words([word.clone()])?);
    Ok(Elimination {
        orbit,
        base,
        power,
        word,
        spec,
    })
}

/// `H_1`, `H_2`, `H_3` and the running `H_3(t)`.
fn h3_with(betas: &[Word]) -> Result<SftSpec> {
    let h3 = reference_sft("h3")?;
    Ok(SftSpec::new(h3.forbidden().with_words(betas.iter().cloned())?))
}

/// A finite stage of the construction: Type I words `u_1 … u_{n1}` and the
/// emitted Type II words, with their ledger.
#[derive(Clone, Debug, PartialEq)]
pub struct StageOracle {
    pub config: StageConfig,
    pub ledger: Vec<LedgerEntry>,
    forbidden: ForbiddenSet,
    horizon: usize,
}

pub fn build_stage_oracle(config: &StageConfig) -> Result<StageOracle> {
    if config.mult == 0 || config.n1 == 0 {
        return Err(Error::InvalidArgument("mult and n1 must be positive".into()));
    }
    let p = &config.params;
    let bin = Alphabet::binary();
    let opts = PowerOptions::default();
    let mut ledger = Vec::new();
    for n in 1..=config.n1 {
        ledger.push(LedgerEntry::type1(n, &type1_word(p, n)?));
    }
    // Type I words long enough to matter for orbits up to the period cap
    let filter_type1 = (1..=config.n1.max(config.period_cap))
        .map(|n| type1_word(p, n))
        .collect::<Result<Vec<_>>>()?;
    let mut emitted: Vec<Word> = Vec::new();
    let current = |emitted: &[Word]| -> Result<SftSpec> {
        Ok(SftSpec::new(ForbiddenSet::new(
            &bin,
            filter_type1.iter().chain(emitted.iter()).cloned(),
        )?))
    };
    let fail = |stage: usize, e: Error| match e {
        Error::Construction { message, .. } => Error::Construction { stage, message },
        other => Error::Construction {
            stage,
            message: other.to_string(),
        },
    };

    let mut stage = 0;
    for (family, count) in [(Family::W11, config.n11), (Family::W00, config.n00)] {
        let mut prev = 0;
        for i in 0..count {
            stage += 1;
            let step = eliminate_periodic_stage(&current(&emitted)?, family, config.mult, p, config.period_cap, prev)
                .map_err(|e| fail(stage, e))?;
            prev = step.word.len();
            ledger.push(LedgerEntry {
                family,
                index: i,
                word: step.word.display(&bin),
                length: step.word.len(),
                base: Some(step.base.display(&bin)),
                power: Some(step.power),
                mult: Some(config.mult),
                orbit: Some(step.orbit.display(&bin)),
                n_heuristic: None,
                reference_entropy: None,
                entropy_floor: None,
            });
            emitted.push(step.word);
        }
    }

    let h3 = sft_entropy(&reference_sft("h3")?, opts)?;
    let mut betas: Vec<Word> = Vec::new();
    let mut floor_sum = 0.0;
    for t in 0..config.n000 {
        stage += 1;
        floor_sum += 0.25f64.powi(t as i32 + 1);
        let floor = (1.0 - floor_sum) * h3;
        let (orbit, base, n_heur, min_len) = if t == 0 {
            (Word::binary("01"), Word::binary("01"), None, 0)
        } else {
            let spec = current(&emitted)?;
            let (orbit, base) = find_template(&spec, &Family::W000.pattern(), &Family::W000.excluded(), config.period_cap)
                .ok_or_else(|| Error::Construction {
                    stage,
                    message: format!("no orbit through 000 of period ≤ {}", config.period_cap),
                })?;
            let n = n_heuristic(&spec, &filter_type1, &emitted, orbit.len());
            let prev = betas.last().map_or(0, |b| b.len());
            // |β_t| > 2|β_{t−1}| and |β_t| > N + t + 1
            let min_len = (2 * prev).max(n + t + 1);
            (orbit, base, Some(n), min_len)
        };
        let mut s = least_absent_power(&base, 0, p).map_err(|e| fail(stage, e))?;
        while base.len() * config.mult * s <= min_len {
            s += 1;
        }
        let (word, h) = loop {
            let word = template_word(&base, s, config.mult, Family::W000);
            let mut trial = betas.clone();
            trial.push(word.clone());
            let h = sft_entropy(&h3_with(&trial)?, opts)?;
            if h > floor {
                break (word, h);
            }
            s += 1;
            if s > POWER_CAP {
                return Err(fail(
                    stage,
                    Error::CapExceeded {
                        what: "repetition exponent",
                        cap: POWER_CAP,
                    },
                ));
            }
        };
        ledger.push(LedgerEntry {
            family: Family::W000,
            index: t,
            word: word.display(&bin),
            length: word.len(),
            base: Some(base.display(&bin)),
            power: Some(s),
            mult: Some(config.mult),
            orbit: Some(orbit.display(&bin)),
            n_heuristic: n_heur,
            reference_entropy: Some(h),
            entropy_floor: Some(floor),
        });
        betas.push(word.clone());
        emitted.push(word);
    }
    StageOracle::from_parts(config.clone(), ledger)
}

/// Largest, over orbits of period at most `p` killed by the collected
/// words, of the shortest collected word occurring in the orbit: past this
/// cover stage no such orbit survives.
fn n_heuristic(spec: &SftSpec, type1: &[Word], emitted: &[Word], p: usize) -> usize {
    let aut = spec.automaton();
    let mut n = 0;
    for q in 1..=p {
        for c in crate::words::lyndon_words(2, q) {
            if aut.avoids_cyclically(&c) {
                continue;
            }
            let shortest = type1
                .iter()
                .chain(emitted.iter())
                .filter(|w| occurs_cyclically(w, &c))
                .map(|w| w.len())
                .min()
                .unwrap_or(0);
            n = n.max(shortest);
        }
    }
    n
}

/// Verdicts of the four claims for `L·a_n·R` and `L·b_n·R`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimsReport {
    pub n: usize,
    pub window: usize,
    /// Claims 1–4 for `a_n`, then for `b_n`: `true` when no word of the
    /// family occurs in the window.
    pub a_claims: [bool; 4],
    pub b_claims: [bool; 4],
}

impl ClaimsReport {
    pub fn all_hold(&self) -> bool {
        self.a_claims.iter().chain(self.b_claims.iter()).all(|&c| c)
    }
}

impl StageOracle {
    /// Rebuild from ledger entries, checking every Type I word against `y`
    /// and every Type II word against its template.
    pub fn from_parts(config: StageConfig, ledger: Vec<LedgerEntry>) -> Result<Self> {
        let bin = Alphabet::binary();
        let mut words = Vec::new();
        for (i, e) in ledger.iter().enumerate() {
            let w = e.letters()?;
            if w.len() != e.length {
                return Err(Error::Construction {
                    stage: i,
                    message: "recorded length does not match the word".into(),
                });
            }
            match e.family {
                Family::TypeI => {
                    if w != type1_word(&config.params, e.index)? {
                        return Err(Error::Construction {
                            stage: i,
                            message: format!("u_{} does not match y", e.index),
                        });
                    }
                }
                fam => {
                    let mult = e.mult.unwrap_or(config.mult);
                    let parsed = parse_template(&w, fam, mult);
                    let base = e.base.as_deref().map(|b| bin.parse_word(b)).transpose()?;
                    if parsed.is_none() || parsed.as_ref().map(|(v, k)| (Some(v.clone()), Some(*k))) != Some((base, e.power)) {
                        return Err(Error::Construction {
                            stage: i,
                            message: "word does not match its template".into(),
                        });
                    }
                }
            }
            words.push(w);
        }
        let forbidden = ForbiddenSet::new(&bin, words)?;
        let honest = honest_horizon(&config, &ledger);
        let horizon = match config.horizon {
            Some(h) if h > honest => {
                return Err(Error::InvalidArgument(format!(
                    "horizon {h} exceeds {honest}, the largest length at which the truncation is exact"
                )))
            }
            Some(h) => h,
            None => honest,
        };
        Ok(StageOracle {
            config,
            ledger,
            forbidden,
            horizon,
        })
    }

    pub fn forbidden(&self) -> &ForbiddenSet {
        &self.forbidden
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn spec(&self) -> SftSpec {
        SftSpec::new(self.forbidden.clone())
    }

    pub fn words(&self, family: Family) -> Vec<Word> {
        self.ledger
            .iter()
            .filter(|e| e.family == family)
            .map(|e| e.letters().expect("validated"))
            .collect()
    }

    /// Membership is avoidance of every collected word.
    pub fn oracle(&self) -> SubshiftOracle {
        let c = &self.config;
        let QuadIrrational { a, b, c: cc, d } = c.params.slope;
        SubshiftOracle::avoidance(
            self.forbidden.clone(),
            self.horizon,
            format!(
                "builtin: x3_stage n1={} n11={} n00={} n000={} mult={} slope=({a},{b},{cc},{d})",
                c.n1, c.n11, c.n00, c.n000, c.mult
            ),
        )
    }

    pub fn ledger_json(&self) -> serde_json::Value {
        json!({
            "schema": 1,
            "config": self.config,
            "horizon": self.horizon,
            "entries": self.ledger,
        })
    }

    /// Replay a ledger produced by `ledger_json`.
    pub fn from_ledger_json(text: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let bad = |m: &str| Error::InvalidArgument(format!("ledger: {m}"));
        if v.get("schema").and_then(|s| s.as_u64()) != Some(1) {
            return Err(bad("unsupported schema"));
        }
        let config: StageConfig =
            serde_json::from_value(v["config"].clone()).map_err(|e| bad(&e.to_string()))?;
        let ledger: Vec<LedgerEntry> =
            serde_json::from_value(v["entries"].clone()).map_err(|e| bad(&e.to_string()))?;
        Self::from_parts(config, ledger)
    }

    /// Entropy after each ledger entry beyond the Type I words, starting
    /// with `X_1` truncated to `u_1 … u_{n1}`.
    pub fn stage_entropies(&self) -> Result<Vec<f64>> {
        let opts = PowerOptions::default();
        let bin = Alphabet::binary();
        let mut words: Vec<Word> = self.words(Family::TypeI);
        let mut out = vec![sft_entropy(&SftSpec::new(ForbiddenSet::new(&bin, words.clone())?), opts)?];
        for e in self.ledger.iter().filter(|e| e.family != Family::TypeI) {
            words.push(e.letters()?);
            out.push(sft_entropy(&SftSpec::new(ForbiddenSet::new(&bin, words.clone())?), opts)?);
        }
        Ok(out)
    }

    /// `a_n` (`u_n` without its last letter) and `b_n` (without its first).
    pub fn a_b(&self, n: usize) -> Result<(Word, Word)> {
        let u = type1_word(&self.config.params, n)?;
        Ok((Word::from(&u[..u.len() - 1]), Word::from(&u[1..])))
    }

    /// The four claims for `u_n` on a window of length about `4|u_n|` of
    /// `L·a_n·R` (and `L·b_n·R`), where `L` is `y` up to index 1 placed to
    /// the left and `R` is `y` from index 1 placed to the right.
    pub fn claims(&self, n: usize) -> Result<ClaimsReport> {
        let p = &self.config.params;
        let (a, b) = self.a_b(n)?;
        let len_u = a.len() + 1;
        let k = (4 * len_u - a.len()).div_ceil(2);
        let left = sturmian_letters(p, 2 - k as i64, 1)?;
        let right = sturmian_letters(p, 1, k as i64)?;
        let window = left.len() + a.len() + right.len();
        let mut type1 = Vec::new();
        let mut m = 1;
        while 4 * m + 6 <= window {
            type1.push(type1_word(p, m)?);
            m += 1;
        }
        let families = [
            type1,
            self.words(Family::W11),
            self.words(Family::W00),
            self.words(Family::W000),
        ];
        let autos: Vec<PatternAutomaton> = families
            .iter()
            .map(|f| PatternAutomaton::from_patterns(2, f.iter().map(|w| w.letters())))
            .collect();
        let check = |mid: &Word| -> [bool; 4] {
            let text = left.concat(mid).concat(&right);
            [0, 1, 2, 3].map(|i| autos[i].avoids(&text))
        };
        Ok(ClaimsReport {
            n,
            window,
            a_claims: check(&a),
            b_claims: check(&b),
        })
    }
}

/// Longest length up to which the finite truncation agrees with the full
/// construction: the next Type I word has length `4(n1+1)+6`, and the next
/// word of a nonempty Type II family is longer than the last one emitted.
fn honest_horizon(config: &StageConfig, ledger: &[LedgerEntry]) -> usize {
    let mut h = 4 * (config.n1 + 1) + 5;
    for fam in [Family::W11, Family::W00, Family::W000] {
        if let Some(last) = ledger.iter().filter(|e| e.family == fam).map(|e| e.length).max() {
            h = h.min(last);
        }
    }
    h
}
