//! Sliding block codes as lookup tables on `(2R+1)`-windows.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::cover::SubshiftOracle;
use crate::error::{Error, Result};
use crate::sft::{PeriodicOrbit, SftSpec};
use crate::words::{parse_alphabet, Alphabet, Word};

/// `(φ(x))(i) = Φ(x(i−R) … x(i+R))`, with `Φ` given by a finite table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockMap {
    range: usize,
    domain: Alphabet,
    codomain: Alphabet,
    table: BTreeMap<Word, u8>,
}

impl BlockMap {
    /// Build a map whose table must cover every word of `slice`.
    pub fn new(
        range: usize,
        domain: Alphabet,
        codomain: Alphabet,
        table: BTreeMap<Word, u8>,
        slice: &[Word],
    ) -> Result<Self> {
        let width = 2 * range + 1;
        for (w, &b) in &table {
            if w.len() != width {
                return Err(Error::InvalidArgument(format!(
                    "window {} has length {}, expected {width}",
                    w.display(&domain),
                    w.len()
                )));
            }
            domain.check(w)?;
            codomain.check(&[b])?;
        }
        let map = BlockMap {
            range,
            domain,
            codomain,
            table,
        };
        map.check_slice(slice)?;
        Ok(map)
    }

    /// Tabulate `f` on `slice`.
    pub fn from_fn(
        range: usize,
        domain: Alphabet,
        codomain: Alphabet,
        slice: &[Word],
        f: impl Fn(&[u8]) -> u8,
    ) -> Result<Self> {
        let table = slice.iter().map(|w| (w.clone(), f(w))).collect();
        Self::new(range, domain, codomain, table, slice)
    }

    /// Tabulate `f` on every `(2R+1)`-word over `domain`.
    pub fn total(range: usize, domain: Alphabet, codomain: Alphabet, f: impl Fn(&[u8]) -> u8) -> Result<Self> {
        let slice: Vec<Word> = domain.all_words(2 * range + 1).collect();
        Self::from_fn(range, domain, codomain, &slice, f)
    }

    /// `Φ(w) = w(R)`.
    pub fn identity(alphabet: &Alphabet, range: usize) -> Result<Self> {
        Self::total(range, alphabet.clone(), alphabet.clone(), |w| w[range])
    }

    /// Binary `0 ↔ 1`, range 0.
    pub fn flip() -> Self {
        Self::total(0, Alphabet::binary(), Alphabet::binary(), |w| 1 - w[0]).expect("binary table")
    }

    /// The left shift as a range-1 code, `Φ(abc) = c`.
    pub fn shift(alphabet: &Alphabet) -> Result<Self> {
        Self::total(1, alphabet.clone(), alphabet.clone(), |w| w[2])
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn window_len(&self) -> usize {
        2 * self.range + 1
    }

    pub fn domain(&self) -> &Alphabet {
        &self.domain
    }

    pub fn codomain(&self) -> &Alphabet {
        &self.codomain
    }

    pub fn table(&self) -> &BTreeMap<Word, u8> {
        &self.table
    }

    /// Error naming the first word of `slice` missing from the table.
    pub fn check_slice(&self, slice: &[Word]) -> Result<()> {
        for w in slice {
            if w.len() != self.window_len() {
                return Err(Error::InvalidArgument(format!(
                    "declared slice word {} is not a window",
                    w.display(&self.domain)
                )));
            }
            self.symbol(w)?;
        }
        Ok(())
    }

    pub fn symbol(&self, window: &[u8]) -> Result<u8> {
        self.table
            .get(window)
            .copied()
            .ok_or_else(|| Error::MissingWindow(self.domain.render(window)))
    }

    /// Output letter `j` is `Φ(w[j … j+2R])`.
    pub fn apply_word(&self, w: &[u8]) -> Result<Word> {
        let width = self.window_len();
        if w.len() < width {
            return Err(Error::WordTooShort {
                len: w.len(),
                window: width,
            });
        }
        w.windows(width).map(|x| self.symbol(x)).collect()
    }

    /// Image of `c^∞`, returned as a period word of the same length.
    pub fn apply_cyclic(&self, c: &[u8]) -> Result<Word> {
        if c.is_empty() {
            return Err(Error::EmptyPeriodWord);
        }
        let p = c.len();
        let width = self.window_len();
        // the output letter at i reads c(i−R … i+R), so start R letters early
        let ext: Vec<u8> = (0..p + width - 1).map(|i| c[(i + p * width - self.range) % p]).collect();
        self.apply_word(&ext)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("range: {}\n", self.range);
        if self.domain == self.codomain {
            if self.domain != Alphabet::binary() {
                let _ = writeln!(out, "alphabet: {}", self.domain);
            }
        } else {
            let _ = writeln!(out, "domain: {}", self.domain);
            let _ = writeln!(out, "codomain: {}", self.codomain);
        }
        for (w, &b) in &self.table {
            let _ = writeln!(out, "{} -> {}", w.display(&self.domain), self.codomain.symbol(b));
        }
        out
    }

    /// Parse `range: R`, optional `alphabet:`/`domain:`/`codomain:` headers
    /// (binary by default) and `<window> -> <symbol>` lines. The declared
    /// slice is the set of listed windows.
    pub fn from_text(text: &str) -> Result<Self> {
        let err = |line: usize, column: usize, message: String| Error::Parse { line, column, message };
        let mut range = None;
        let mut domain = Alphabet::binary();
        let mut codomain = Alphabet::binary();
        let mut entries: Vec<(usize, String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            let ln = i + 1;
            if line.is_empty() {
                continue;
            }
            if let Some((lhs, rhs)) = line.split_once("->") {
                entries.push((ln, lhs.trim().to_string(), rhs.trim().to_string()));
                continue;
            }
            let Some((key, value)) = line.split_once(':') else {
                return Err(err(ln, 1, format!("expected `key: value` or `window -> symbol`, got {line:?}")));
            };
            let value = value.trim();
            let col = raw.find(':').map_or(1, |c| c + 2);
            match key.trim() {
                "range" => {
                    range = Some(
                        value
                            .parse::<usize>()
                            .map_err(|e| err(ln, col, format!("range: {e}")))?,
                    )
                }
                "alphabet" => {
                    domain = parse_alphabet(value).map_err(|e| err(ln, col, e.to_string()))?;
                    codomain = domain.clone();
                }
                "domain" => domain = parse_alphabet(value).map_err(|e| err(ln, col, e.to_string()))?,
                "codomain" => codomain = parse_alphabet(value).map_err(|e| err(ln, col, e.to_string()))?,
                other => return Err(err(ln, 1, format!("unknown header {other:?}"))),
            }
        }
        let range = range.ok_or_else(|| err(1, 1, "missing `range:` header".into()))?;
        let mut table = BTreeMap::new();
        for (ln, lhs, rhs) in entries {
            let w = domain.parse_word(&lhs).map_err(|e| err(ln, 1, e.to_string()))?;
            if w.len() != 2 * range + 1 {
                return Err(err(ln, 1, format!("window {lhs:?} is not of length {}", 2 * range + 1)));
            }
            let mut chars = rhs.chars();
            let (Some(c), None) = (chars.next(), chars.next()) else {
                return Err(err(ln, 1, format!("expected a single output symbol, got {rhs:?}")));
            };
            let b = codomain.index_of(c).ok_or_else(|| err(ln, 1, format!("symbol {c:?} not in codomain")))?;
            if table.insert(w, b).is_some() {
                return Err(err(ln, 1, format!("duplicate window {lhs:?}")));
            }
        }
        let slice: Vec<Word> = table.keys().cloned().collect();
        Self::new(range, domain, codomain, table, &slice)
    }
}

/// `Φ ∘ Ψ` of range `R_Φ + R_Ψ`. With `slice` given, the composed table must
/// be derivable on each of its words; otherwise it is tabulated on every
/// window of the domain where both tables apply.
pub fn compose(phi: &BlockMap, psi: &BlockMap, slice: Option<&[Word]>) -> Result<BlockMap> {
    if psi.codomain != phi.domain {
        return Err(Error::AlphabetMismatch(format!(
            "inner codomain {} differs from outer domain {}",
            psi.codomain, phi.domain
        )));
    }
    let range = phi.range + psi.range;
    let compose_at = |w: &[u8]| -> Result<u8> {
        let mid = psi.apply_word(w)?;
        Ok(phi.apply_word(&mid)?[0])
    };
    let mut table = BTreeMap::new();
    let declared: Vec<Word> = match slice {
        Some(s) => {
            for w in s {
                table.insert(w.clone(), compose_at(w)?);
            }
            s.to_vec()
        }
        None => {
            for w in psi.domain.all_words(2 * range + 1) {
                if let Ok(b) = compose_at(&w) {
                    table.insert(w, b);
                }
            }
            table.keys().cloned().collect()
        }
    };
    BlockMap::new(range, psi.domain.clone(), phi.codomain.clone(), table, &declared)
}

/// Image orbit; its minimal period divides the input period.
pub fn apply_orbit(phi: &BlockMap, orbit: &PeriodicOrbit) -> Result<PeriodicOrbit> {
    PeriodicOrbit::of(&phi.apply_cyclic(orbit.period_word())?)
}

/// `{Φ(w) : w ∈ L_{L+2R}(X)}`.
pub fn image_slice(phi: &BlockMap, spec: &SftSpec, len: usize, cap: usize) -> Result<BTreeSet<Word>> {
    spec.language_slice(len + 2 * phi.range, cap)?
        .iter()
        .map(|w| phi.apply_word(w))
        .collect()
}

pub const SLICE_CAP: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AutomorphismFailure {
    /// `image` (an image word leaves the language) or `inverse` (the
    /// composition does not trim to the identity).
    pub check: &'static str,
    pub direction: &'static str,
    pub word: String,
    pub got: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AutomorphismCheck {
    pub depth: usize,
    pub words_checked: usize,
    pub failures: Vec<AutomorphismFailure>,
}

impl AutomorphismCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Check on the oracle's language, both ways round, that each map sends
/// words of length `depth + 2R` into the language and that the composite
/// reproduces the middle of every word of length `depth + 2(R_Φ + R_Ψ)`.
/// Words whose windows are missing from a table count as failures.
pub fn verify_automorphism_pair(
    phi: &BlockMap,
    phi_inv: &BlockMap,
    oracle: &SubshiftOracle,
    depth: usize,
) -> Result<AutomorphismCheck> {
    let total = phi.range + phi_inv.range;
    if depth == 0 || depth + 2 * total > oracle.horizon() {
        return Err(Error::InvalidArgument(format!(
            "depth {depth} needs words of length {} beyond the oracle horizon {}",
            depth + 2 * total,
            oracle.horizon()
        )));
    }
    for m in [phi, phi_inv] {
        if m.domain != *oracle.alphabet() || m.codomain != *oracle.alphabet() {
            return Err(Error::AlphabetMismatch("maps must act on the oracle alphabet".into()));
        }
    }
    let a = oracle.alphabet();
    let mut failures = Vec::new();
    let mut words_checked = 0;
    for (name, f, g) in [("forward", phi, phi_inv), ("backward", phi_inv, phi)] {
        for w in oracle.language_slice(depth + 2 * f.range, SLICE_CAP)? {
            words_checked += 1;
            match f.apply_word(&w) {
                Ok(img) if oracle.member(&img)? => {}
                Ok(img) => failures.push(AutomorphismFailure {
                    check: "image",
                    direction: name,
                    word: w.display(a),
                    got: img.display(a),
                }),
                Err(e) => failures.push(AutomorphismFailure {
                    check: "image",
                    direction: name,
                    word: w.display(a),
                    got: e.to_string(),
                }),
            }
        }
        for w in oracle.language_slice(depth + 2 * total, SLICE_CAP)? {
            words_checked += 1;
            let back = f.apply_word(&w).and_then(|x| g.apply_word(&x));
            let middle = &w[total..w.len() - total];
            match back {
                Ok(x) if x.letters() == middle => {}
                Ok(x) => failures.push(AutomorphismFailure {
                    check: "inverse",
                    direction: name,
                    word: w.display(a),
                    got: x.display(a),
                }),
                Err(e) => failures.push(AutomorphismFailure {
                    check: "inverse",
                    direction: name,
                    word: w.display(a),
                    got: e.to_string(),
                }),
            }
        }
    }
    Ok(AutomorphismCheck {
        depth,
        words_checked,
        failures,
    })
}
