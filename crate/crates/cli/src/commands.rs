use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use symdyn::blockcodes::{verify_automorphism_pair, BlockMap};
use symdyn::bounds::{
    cover_drop_report, drop_report, gap_report, prop_report, xi_report, BoundReport, Xi_report,
};
use symdyn::constructions::stages::{build_stage_oracle, StageConfig, StageOracle};
use symdyn::constructions::sturmian::{sturmian_letters, SturmianParams};
use symdyn::cover::{
    cover_stage, entropy_certificate, entropy_stability_scan, language_certificate,
    language_stability_scan, parse_oracle, parse_quad, period_stability_scan, StabilityCertificate,
    SubshiftOracle, Witness,
};
use symdyn::measures::{atomic_measure, mme_stage_table, pushforward, CylinderTable};
use symdyn::sft::SftSpec;
use symdyn::spectral::{perron, scc_entropy, ParryMeasure, PowerOptions};
use symdyn::words::{ForbiddenSet, Word};
use symdyn::Error;

use crate::report::{write_atomic, Report};
use crate::{BoundKind, Cli, Command, ConstructKind, CoverScan, RunConfig};

const ORBIT_CAP: usize = 1 << 20;

pub fn run(cli: Cli) -> Result<Report> {
    let run = &cli.run;
    if !(run.tol > 0.0 && run.tol <= 1e-3) {
        bail!("--tol must lie in (0, 1e-3]");
    }
    if run.state_cap == 0 {
        bail!("--state-cap must be positive");
    }
    match cli.command {
        Command::Entropy { ref spec } => entropy(run, spec),
        Command::Mme {
            ref spec,
            ell,
            ref oracle,
            ref stages,
            ref words,
        } => match (spec, oracle) {
            (Some(spec), None) => mme(run, spec, ell, words.as_deref()),
            (None, Some(oracle)) => mme_stages(oracle, stages.as_deref(), ell, words.as_deref()),
            _ => bail!("give either a spec file or --oracle"),
        },
        Command::Periodic { ref spec, p_max } => periodic(run, spec, p_max),
        Command::Cover {
            ref scan,
            ref verify,
            ref oracle,
        } => match (scan, verify) {
            (Some(scan), _) => cover_scan(scan),
            (None, Some(cert)) => cover_verify(cert, oracle.as_deref()),
            (None, None) => bail!("give a scan subcommand or --verify <certificate>"),
        },
        Command::Bounds { ref kind } => bounds(run, kind),
        Command::Construct { ref kind } => construct(kind),
        Command::VerifyBlockmap {
            ref map,
            ref inverse,
            ref oracle,
            depth,
            p_max,
        } => verify_blockmap(map, inverse, oracle, depth, p_max),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_spec(path: &Path) -> Result<SftSpec> {
    let text = read(path)?;
    let f = ForbiddenSet::from_text(&text).with_context(|| format!("in {}", path.display()))?;
    Ok(SftSpec::new(f))
}

fn load_oracle(path: &Path, horizon: Option<usize>) -> Result<SubshiftOracle> {
    let text = read(path)?;
    let o = parse_oracle(&text).with_context(|| format!("in {}", path.display()))?;
    match horizon {
        None => Ok(o),
        Some(h) if h <= o.horizon() => Ok(o.with_horizon(h)?),
        Some(h) => bail!("--horizon {h} exceeds the oracle's horizon {}", o.horizon()),
    }
}

fn opts(run: &RunConfig) -> PowerOptions {
    PowerOptions {
        tol: run.tol,
        ..PowerOptions::default()
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn entropy(run: &RunConfig, path: &Path) -> Result<Report> {
    let spec = load_spec(path)?;
    let v = spec.recode(spec.default_order(), run.state_cap)?;
    if v.is_empty() {
        return Err(Error::EmptyShift.into());
    }
    let irreducible = v.is_transitive();
    let mut out = if irreducible {
        perron(v.graph(), opts(run))?.report_json()
    } else {
        let h = scc_entropy(v.graph(), opts(run))?;
        json!({ "lambda": h.exp(), "entropy_nats": h, "entropy_bits": h / std::f64::consts::LN_2 })
    };
    out["schema"] = json!(1);
    out["states"] = json!(v.len());
    out["order"] = json!(v.order());
    out["irreducible"] = json!(irreducible);
    out["mixing"] = json!(v.primitivity().is_some());
    let rows = ["lambda", "entropy_nats", "entropy_bits"]
        .iter()
        .map(|k| vec![k.to_string(), num(out[*k].as_f64().unwrap_or(f64::NAN))])
        .chain(std::iter::once(vec!["states".into(), v.len().to_string()]))
        .collect();
    Ok(Report::new(out).table(vec!["quantity", "value"], rows))
}

fn parse_words(text: &str, alphabet: &symdyn::words::Alphabet) -> Result<Vec<Word>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| alphabet.parse_word(s).map_err(Into::into))
        .collect()
}

fn all_words(alphabet: &symdyn::words::Alphabet, ell: usize) -> Vec<Word> {
    (1..=ell).flat_map(|n| alphabet.all_words(n)).collect()
}

fn mme(run: &RunConfig, path: &Path, ell: usize, words: Option<&str>) -> Result<Report> {
    let spec = load_spec(path)?;
    let v = spec.recode(spec.default_order(), run.state_cap)?;
    let m = ParryMeasure::new(&v, opts(run))?;
    let a = spec.alphabet();
    let rows: Vec<(String, f64)> = match words {
        Some(w) => parse_words(w, a)?
            .iter()
            .map(|w| Ok((w.display(a), m.cylinder(w)?)))
            .collect::<Result<_>>()?,
        None => CylinderTable::parry(&m, ell)?.rows,
    };
    let out = json!({
        "schema": 1,
        "lambda": m.perron().lambda,
        "entropy_nats": m.perron().entropy_nats,
        "rows": rows.iter().map(|(w, p)| json!({ "word": w, "probability": p })).collect::<Vec<_>>(),
    });
    let csv = rows.iter().map(|(w, p)| vec![w.clone(), num(*p)]).collect();
    Ok(Report::new(out).table(vec!["word", "probability"], csv))
}

fn parse_stages(text: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = text.split_once('-') {
        let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
        if a == 0 || b < a {
            bail!("bad stage range {text:?}");
        }
        return Ok((a..=b).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse::<usize>().with_context(|| format!("bad stage {s:?}")))
        .collect()
}

fn mme_stages(path: &Path, stages: Option<&str>, ell: usize, words: Option<&str>) -> Result<Report> {
    let o = load_oracle(path, None)?;
    let stages = match stages {
        Some(s) => parse_stages(s)?,
        None => (1..=o.horizon().min(8)).collect(),
    };
    let words = match words {
        Some(w) => parse_words(w, o.alphabet())?,
        None => all_words(o.alphabet(), ell),
    };
    let t = mme_stage_table(&o, &stages, &words)?;
    let csv = t
        .rows
        .iter()
        .map(|r| {
            vec![
                r.stage.to_string(),
                r.word.clone(),
                num(r.probability),
                r.delta_prev.map(num).unwrap_or_default(),
            ]
        })
        .collect();
    let mut out = serde_json::to_value(&t)?;
    out["schema"] = json!(1);
    out["oracle"] = json!(o.provenance());
    Ok(Report::new(out).table(vec!["stage", "word", "probability", "delta_prev"], csv))
}

fn periodic(run: &RunConfig, path: &Path, p_max: usize) -> Result<Report> {
    let spec = load_spec(path)?;
    let v = spec.recode(spec.default_order(), run.state_cap)?;
    let a = spec.alphabet();
    let mut rows = Vec::new();
    let mut csv = Vec::new();
    for p in 1..=p_max {
        let points = v.periodic_count(p).to_string();
        let orbits: Vec<String> = v
            .enumerate_min_periodic(p, ORBIT_CAP)?
            .iter()
            .map(|o| o.display(a))
            .collect();
        csv.push(vec![p.to_string(), points.clone(), orbits.len().to_string(), orbits.join(" ")]);
        rows.push(json!({ "p": p, "points": points, "orbit_count": orbits.len(), "orbits": orbits }));
    }
    let out = json!({ "schema": 1, "states": v.len(), "rows": rows });
    Ok(Report::new(out).table(vec!["p", "points", "orbit_count", "orbits"], csv))
}

fn save_cert(cert: &StabilityCertificate, path: Option<&Path>) -> Result<()> {
    if let Some(p) = path {
        let mut bytes = serde_json::to_vec_pretty(&cert.to_json())?;
        bytes.push(b'\n');
        write_atomic(p, &bytes).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn cert_json(cert: &Option<StabilityCertificate>) -> Value {
    cert.as_ref().map_or(Value::Null, |c| c.to_json())
}

fn cover_scan(scan: &CoverScan) -> Result<Report> {
    match scan {
        CoverScan::ScanLanguage {
            oracle,
            horizon,
            cert_out,
        } => {
            let o = load_oracle(oracle, *horizon)?;
            let s = language_stability_scan(&o, o.horizon())?;
            let best = s.rows.iter().copied().filter(|&(_, j)| j > 0).max_by_key(|&(n, j)| (j, std::cmp::Reverse(n)));
            let cert = match best {
                Some((n, j)) => language_certificate(&o, n, j)?,
                None => None,
            };
            save_cert_opt(&cert, cert_out.as_deref())?;
            let out = json!({
                "schema": 1,
                "oracle": o.provenance(),
                "horizon": s.horizon,
                "breaks": s.breaks,
                "rows": s.rows.iter().map(|(n, j)| json!({ "n": n, "j": j })).collect::<Vec<_>>(),
                "certificate": cert_json(&cert),
            });
            let csv = s.rows.iter().map(|(n, j)| vec![n.to_string(), j.to_string()]).collect();
            Ok(Report::new(out).table(vec!["n", "j"], csv))
        }
        CoverScan::ScanEntropy {
            oracle,
            eps,
            ell,
            j,
            horizon,
            cert_out,
        } => {
            let o = load_oracle(oracle, *horizon)?;
            let s = entropy_stability_scan(&o, *eps, *ell, *j, o.horizon())?;
            let cert = match s.rows.iter().find(|r| r.verdict) {
                Some(row) => entropy_certificate(&o, &s, row)?,
                None => None,
            };
            save_cert_opt(&cert, cert_out.as_deref())?;
            let csv = s
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.m.to_string(),
                        r.j.to_string(),
                        num(r.h_m),
                        num(r.h_m_plus_j),
                        num(r.drop),
                        r.s_m.map(|x| x.to_string()).unwrap_or_default(),
                        r.xi_log.map(num).unwrap_or_default(),
                        r.verdict.to_string(),
                    ]
                })
                .collect();
            let mut out = serde_json::to_value(&s)?;
            out["schema"] = json!(1);
            out["oracle"] = json!(o.provenance());
            out["certificate"] = cert_json(&cert);
            Ok(Report::new(out).table(
                vec!["m", "j", "h_m", "h_m_plus_j", "drop", "s_m", "xi_log", "verdict"],
                csv,
            ))
        }
        CoverScan::ScanPeriod {
            oracle,
            m,
            n_max,
            p_max,
            cert_out,
        } => {
            let o = load_oracle(oracle, None)?;
            let cert = period_stability_scan(&o, *m, *n_max, *p_max)?;
            save_cert_opt(&cert, cert_out.as_deref())?;
            let csv = match cert.as_ref().map(|c| &c.witness) {
                Some(Witness::Period { m, n, p, orbits, .. }) => {
                    vec![vec![m.to_string(), n.to_string(), p.to_string(), orbits.join(" ")]]
                }
                _ => Vec::new(),
            };
            let out = json!({
                "schema": 1,
                "oracle": o.provenance(),
                "m": m,
                "n_max": n_max,
                "p_max": p_max,
                "certificate": cert_json(&cert),
            });
            let found = cert.is_some();
            Ok(Report::new(out).table(vec!["m", "n", "p", "orbits"], csv).verdict(found))
        }
    }
}

fn save_cert_opt(cert: &Option<StabilityCertificate>, path: Option<&Path>) -> Result<()> {
    match cert {
        Some(c) => save_cert(c, path),
        None if path.is_some() => bail!("no certificate was found to write"),
        None => Ok(()),
    }
}

fn cover_verify(cert: &Path, oracle: Option<&Path>) -> Result<Report> {
    let c = StabilityCertificate::from_json(&read(cert)?).with_context(|| format!("in {}", cert.display()))?;
    let o = oracle.map(|p| load_oracle(p, None)).transpose()?;
    let check = c.verify(o.as_ref())?;
    let out = json!({
        "schema": 1,
        "kind": c.kind(),
        "oracle_queried": o.is_some(),
        "passed": check.passed,
        "failures": check.failures,
    });
    let csv = vec![vec![c.kind().to_string(), check.passed.to_string(), check.failures.join("; ")]];
    Ok(Report::new(out).table(vec!["kind", "passed", "failures"], csv).verdict(check.passed))
}

/// `ln2`, `ln(3)`, `ln 5` or a plain number.
fn parse_entropy(text: &str) -> Result<f64> {
    let t = text.trim();
    if let Some(rest) = t.strip_prefix("ln") {
        let inner = rest.trim().trim_start_matches('(').trim_end_matches(')').trim();
        let x: f64 = inner.parse().with_context(|| format!("bad entropy {text:?}"))?;
        if x <= 0.0 {
            bail!("bad entropy {text:?}");
        }
        return Ok(x.ln());
    }
    t.parse().with_context(|| format!("bad entropy {text:?}"))
}

fn bounds(run: &RunConfig, kind: &BoundKind) -> Result<Report> {
    let r: BoundReport = match kind {
        BoundKind::Xi { s } => xi_report(*s)?,
        BoundKind::Gap { eps, ell, s } => gap_report(*eps, *ell, *s)?,
        BoundKind::BigXi { eps, ell, j, s_m } => Xi_report(*eps, *ell, *j, *s_m, "states")?,
        BoundKind::Prop { s } => prop_report(*s)?,
        BoundKind::Drop { h, n, k } => drop_report(parse_entropy(h)?, *n, *k)?,
        BoundKind::CoverDrop { s, k, a } => cover_drop_report(*s, *k, *a)?,
    };
    let r = if run.bits { r.in_bits() } else { r };
    let csv = vec![vec![
        r.name.clone(),
        num(r.log_value),
        r.value().map(num).unwrap_or_default(),
        r.unit.clone(),
    ]];
    Ok(Report::new(r.to_json()).table(vec!["name", "log_value", "value", "unit"], csv))
}

fn ledger_rows(stage: &StageOracle) -> Vec<Vec<String>> {
    stage
        .ledger
        .iter()
        .map(|e| {
            vec![
                format!("{:?}", e.family),
                e.index.to_string(),
                e.length.to_string(),
                e.base.clone().unwrap_or_default(),
                e.power.map(|x| x.to_string()).unwrap_or_default(),
                e.orbit.clone().unwrap_or_default(),
            ]
        })
        .collect()
}

const LEDGER_HEADER: [&str; 6] = ["family", "index", "length", "base", "power", "orbit"];

fn construct(kind: &ConstructKind) -> Result<Report> {
    match kind {
        ConstructKind::X3Stage {
            n1,
            n11,
            n00,
            n000,
            mult,
            period_cap,
            horizon,
            ledger_out,
            oracle_out,
        } => {
            let cfg = StageConfig {
                n1: *n1,
                n11: *n11,
                n00: *n00,
                n000: *n000,
                mult: *mult,
                period_cap: *period_cap,
                horizon: *horizon,
                ..StageConfig::default()
            };
            let stage = build_stage_oracle(&cfg)?;
            let claims = (1..=cfg.n1).map(|n| stage.claims(n)).collect::<symdyn::Result<Vec<_>>>()?;
            let all_hold = claims.iter().all(|c| c.all_hold());
            let ledger = stage.ledger_json();
            if let Some(p) = ledger_out {
                let mut bytes = serde_json::to_vec_pretty(&ledger)?;
                bytes.push(b'\n');
                write_atomic(p, &bytes).with_context(|| format!("writing {}", p.display()))?;
            }
            if let Some(p) = oracle_out {
                let text = format!(
                    "builtin: x3_stage\nn1: {n1}\nn11: {n11}\nn00: {n00}\nn000: {n000}\nmult: {mult}\nperiod_cap: {period_cap}\nhorizon: {}\n",
                    stage.horizon()
                );
                write_atomic(p, text.as_bytes()).with_context(|| format!("writing {}", p.display()))?;
            }
            let out = json!({
                "schema": 1,
                "ledger": ledger,
                "horizon": stage.horizon(),
                "stage_entropies": stage.stage_entropies()?,
                "claims": claims,
            });
            Ok(Report::new(out)
                .table(LEDGER_HEADER.to_vec(), ledger_rows(&stage))
                .verdict(all_hold))
        }
        ConstructKind::Replay { ledger } => {
            let text = read(ledger)?;
            let stage = StageOracle::from_ledger_json(&text).with_context(|| format!("in {}", ledger.display()))?;
            let given: Value = serde_json::from_str(&text)?;
            let identical = given == stage.ledger_json();
            let out = json!({
                "schema": 1,
                "words": stage.ledger.len(),
                "horizon": stage.horizon(),
                "identical": identical,
            });
            Ok(Report::new(out)
                .table(LEDGER_HEADER.to_vec(), ledger_rows(&stage))
                .verdict(identical))
        }
        ConstructKind::Sturmian {
            from,
            to,
            slope,
            intercept,
        } => {
            let d = SturmianParams::default();
            let params = SturmianParams::new(
                slope.as_deref().map_or(Ok(d.slope), parse_quad)?,
                intercept.as_deref().map_or(Ok(d.intercept), parse_quad)?,
            )?;
            let y = sturmian_letters(&params, *from, *to)?;
            let letters: String = y.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
            let csv = y
                .iter()
                .enumerate()
                .map(|(i, b)| vec![(*from + i as i64).to_string(), b.to_string()])
                .collect();
            let out = json!({
                "schema": 1,
                "slope": params.slope,
                "intercept": params.intercept,
                "from": from,
                "to": to,
                "letters": letters,
            });
            Ok(Report::new(out).table(vec!["n", "letter"], csv))
        }
    }
}

fn verify_blockmap(map: &Path, inverse: &Path, oracle: &Path, depth: usize, p_max: usize) -> Result<Report> {
    let phi = BlockMap::from_text(&read(map)?).with_context(|| format!("in {}", map.display()))?;
    let inv = BlockMap::from_text(&read(inverse)?).with_context(|| format!("in {}", inverse.display()))?;
    let o = load_oracle(oracle, None)?;
    let check = verify_automorphism_pair(&phi, &inv, &o, depth)?;
    let mut orbit_rows = Vec::new();
    let mut orbits_ok = true;
    if check.passed() {
        let stage = cover_stage(&o, depth.min(o.horizon()))?.spec;
        for p in 1..=p_max {
            let orbits = stage.periodic_orbits(p);
            if orbits.is_empty() {
                continue;
            }
            let mu = atomic_measure(orbits.clone())?;
            let fwd = pushforward(&phi, &mu)?;
            let back = pushforward(&inv, &mu)?;
            let ok = fwd.invariant() && back.invariant();
            orbits_ok &= ok;
            orbit_rows.push(json!({
                "p": p,
                "orbits": orbits.len(),
                "points": mu.total_points(),
                "permutation": fwd.permutation && back.permutation,
                "invariant": ok,
                "cylinders_checked": fwd.cylinders_checked,
            }));
        }
    }
    let passed = check.passed() && orbits_ok;
    let csv = check
        .failures
        .iter()
        .map(|f| vec![f.check.to_string(), f.direction.to_string(), f.word.clone(), f.got.clone()])
        .collect();
    let out = json!({
        "schema": 1,
        "oracle": o.provenance(),
        "passed": passed,
        "pair": check,
        "orbits": orbit_rows,
    });
    Ok(Report::new(out).table(vec!["check", "direction", "word", "got"], csv).verdict(passed))
}
