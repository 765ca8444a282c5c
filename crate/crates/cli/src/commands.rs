use std::collections::BTreeSet;
use std::path::Path;

use cvec_core::coxeter::{coxeter_product_check_with, reflections_along, run_walk};
use cvec_core::fork::{random_fork_preserving_sequence, random_fork_with};
use cvec_core::gim::admissibility_violation;
use cvec_core::verify::{rank3_descent, rank3_reaches_acyclic, verify_l_c_magnitudes};
use cvec_core::{
    apply_gim_sequence, apply_sequence, coxeter_product_check, curves_for_reflections,
    find_point_of_return, fixtures, fork_linear_ordering, is_fork_preserving, non_crossing,
    random_walk_campaign, render_svg, verify_l_c_relation, verify_rank3_theorem,
    verify_sign_invariance, CampaignConfig, Check, CheckKind, ExchangeMatrix, FamilyLabeling,
    LinearOrdering, MutationSequence, VerificationReport, Window,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::output::{self, csv_table, json, row_strings};
use crate::{CliError, Cli, Command, Common, Format, LMethod, Produced, Theorem, EXIT_FINDING, EXIT_OK};

type R<T> = Result<T, CliError>;

pub(crate) fn dispatch(cli: &Cli) -> R<Produced> {
    let c = &cli.common;
    match &cli.command {
        Command::Mutate => mutate(c),
        Command::Lmatrix { method } => lmatrix(c, *method),
        Command::Reflections { product } => reflections(c, product.as_deref()),
        Command::Gim => gim(c),
        Command::Verify {
            theorem,
            pair,
            depth,
            trials,
            ns,
            max_weight,
            walk_length,
            checks,
            lambda,
            rho,
        } => match theorem {
            Theorem::Quadratic => finish_report(c, verify_rank3_theorem(&quiver(c)?, *depth)?, None),
            Theorem::SignInvariance => sign_invariance(c, pair.as_deref()),
            Theorem::LC => l_c(c),
            Theorem::Coxeter => coxeter(c, lambda.as_deref(), rho.as_deref()),
            Theorem::Cyclic => cyclic(c, *depth),
            Theorem::Campaign => {
                // An empty campaign needs no seed.
                let seed = if *trials == 0 { c.rng_seed } else { Some(rng_seed(c)?) };
                let mut cfg =
                    CampaignConfig::new(parse_list(ns)?, *max_weight, *walk_length, *trials, seed.unwrap_or(0));
                if let Some(list) = checks {
                    cfg.checks = list
                        .split(',')
                        .map(str::parse)
                        .collect::<Result<BTreeSet<CheckKind>, _>>()?;
                }
                finish_report(c, random_walk_campaign(&cfg)?, seed)
            }
        },
        Command::Walk { n, max_weight, length } => walk(c, *n, *max_weight, *length),
        Command::Curves { sigma, bound } => curves(c, sigma.as_deref(), *bound),
        Command::Replay { .. } => unreachable!("handled before dispatch"),
    }
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

/// A built-in name or a path to a JSON file.
pub(crate) fn load_quiver(spec: &str) -> R<ExchangeMatrix> {
    if let Some(b) = fixtures::by_name(spec) {
        return Ok(b);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(input(format!(
            "unknown quiver {spec:?}: expected one of {} or a JSON file",
            fixtures::NAMES.join(", ")
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| input(format!("{spec}: {e}")))
}

fn quiver(c: &Common) -> R<ExchangeMatrix> {
    load_quiver(c.quiver.as_deref().ok_or_else(|| input("--quiver is required"))?)
}

fn sequence(c: &Common, n: usize) -> R<MutationSequence> {
    let w: MutationSequence = c.seq.as_deref().unwrap_or("").parse()?;
    w.check_indices(n)?;
    Ok(w)
}

fn parse_list(s: &str) -> R<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| input(format!("bad number {t:?}"))))
        .collect()
}

fn parse_ordering(s: &str, n: usize) -> R<LinearOrdering> {
    let o: LinearOrdering = s.parse()?;
    if o.n() != n {
        return Err(cvec_core::Error::BadOrdering { n }.into());
    }
    Ok(o)
}

/// `--ordering` if given, otherwise the fork ordering of a fork.
fn ordering(c: &Common, b: &ExchangeMatrix) -> R<LinearOrdering> {
    if let Some(s) = &c.ordering {
        return parse_ordering(s, b.n());
    }
    match find_point_of_return(b) {
        Some(cert) => Ok(fork_linear_ordering(&cert, b)?),
        None => Err(input("quiver is not a fork; pass --ordering")),
    }
}

/// The given seed, or a fresh one unless CI is set.
fn rng_seed(c: &Common) -> R<u64> {
    match c.rng_seed {
        Some(s) => Ok(s),
        None if std::env::var_os("CI").is_some() => Err(input("--rng-seed is required when CI is set")),
        None => Ok(rand::random()),
    }
}

fn produced(code: i32, body: String) -> Produced {
    Produced {
        code,
        body,
        summary: None,
        artifact: None,
        rng_seed: None,
        passed: code == EXIT_OK,
    }
}

fn finish_report(c: &Common, r: VerificationReport, seed: Option<u64>) -> R<Produced> {
    let passed = r.passed();
    let mut body = output::report(&r, c.format)?;
    if c.format == Format::Table {
        if let Some(s) = seed {
            body.push_str(&format!("rng seed {s}\n"));
        }
    }
    let verdict = if passed { "PASS" } else { "FAIL" };
    Ok(Produced {
        code: if passed { EXIT_OK } else { EXIT_FINDING },
        summary: Some(format!("{verdict}: {} checks\n", r.checks.len())),
        body,
        artifact: None,
        rng_seed: seed,
        passed,
    })
}

fn mutate(c: &Common) -> R<Produced> {
    let b = quiver(c)?;
    let w = sequence(c, b.n())?;
    let seed = apply_sequence(&b, &w)?;
    let signs = seed.sign_vector()?;
    let body = match c.format {
        Format::Table => format!("sequence {w}\n{}signs {signs}\n", seed.render()),
        Format::Json => json(&json!({
            "sequence": w,
            "b": seed.b.matrix(),
            "c": seed.c,
            "signs": signs.signs(),
        })),
        Format::Csv => {
            let n = b.n();
            let mut header = vec!["row".to_string()];
            header.extend((1..=n).map(|j| format!("b{j}")));
            header.extend((1..=n).map(|j| format!("c{j}")));
            header.push("sign".into());
            let rows: Vec<Vec<String>> = (0..n)
                .map(|i| {
                    let mut r = vec![(i + 1).to_string()];
                    r.extend(row_strings(seed.b.matrix(), i));
                    r.extend(row_strings(&seed.c, i));
                    r.push(signs.signs()[i].to_string());
                    r
                })
                .collect();
            let h: Vec<&str> = header.iter().map(String::as_str).collect();
            csv_table(&h, &rows)?
        }
    };
    Ok(produced(EXIT_OK, body))
}

fn lmatrix(c: &Common, method: LMethod) -> R<Produced> {
    let b = quiver(c)?;
    let w = sequence(c, b.n())?;
    let ord = ordering(c, &b)?;
    let state = run_walk(&b, &ord, &w)?;
    let words = state.l_matrix_from_words();
    let recurrence = cvec_core::LMatrix::from_raw(state.l.clone());
    let agree = words.equal_up_to_row_sign(&recurrence);
    let code = if method == LMethod::Both && !agree { EXIT_FINDING } else { EXIT_OK };
    let mut shown = Vec::new();
    if method != LMethod::Recurrence {
        shown.push(("words", &words.raw));
    }
    if method != LMethod::Words {
        shown.push(("recurrence", &recurrence.raw));
    }
    let body = match c.format {
        Format::Table => {
            let mut s = format!("ordering {ord}, sequence {w}\n");
            for (name, m) in &shown {
                s.push_str(&format!("L ({name})\n{m}"));
            }
            if method == LMethod::Both {
                s.push_str(&format!("agree up to row sign: {agree}\n"));
            }
            s
        }
        Format::Json => {
            let mut v = json!({ "ordering": ord, "sequence": w });
            for (name, m) in &shown {
                v[*name] = json!(m);
            }
            if method == LMethod::Both {
                v["agree_up_to_row_sign"] = json!(agree);
            }
            json(&v)
        }
        Format::Csv => {
            let mut s = String::new();
            for (name, m) in &shown {
                let rows: Vec<Vec<String>> = (0..m.rows())
                    .map(|i| {
                        let mut r = vec![name.to_string(), (i + 1).to_string()];
                        r.extend(row_strings(m, i));
                        r
                    })
                    .collect();
                let cols: Vec<String> = (1..=m.cols()).map(|j| format!("l{j}")).collect();
                let mut header = vec!["method", "row"];
                header.extend(cols.iter().map(String::as_str));
                let table = csv_table(&header, &rows)?;
                // One header for the whole output.
                let skip = if s.is_empty() { 0 } else { table.find('\n').map_or(0, |p| p + 1) };
                s.push_str(&table[skip..]);
            }
            s
        }
    };
    Ok(produced(code, body))
}

fn reflections(c: &Common, product: Option<&str>) -> R<Produced> {
    let b = quiver(c)?;
    let w = sequence(c, b.n())?;
    let t = reflections_along(&b, &w)?;
    let product = match product {
        Some(p) => {
            let o = parse_ordering(p, b.n())?;
            Some((o.clone(), t.product(o.order())))
        }
        None => None,
    };
    let body = match c.format {
        Format::Table => {
            let mut s = format!("sequence {w}\n");
            for (i, r) in t.refs.iter().enumerate() {
                s.push_str(&format!("r{} = {r}\n", i + 1));
            }
            if let Some((o, p)) = &product {
                s.push_str(&format!("product in order {o} = {p}\n"));
            }
            s
        }
        Format::Json => {
            let words: Vec<_> = t.refs.iter().map(|r| r.word()).collect();
            let mut v = json!({ "sequence": w, "reflections": words });
            if let Some((o, p)) = &product {
                v["product"] = json!({ "order": o, "word": p });
            }
            json(&v)
        }
        Format::Csv => {
            let mut rows: Vec<Vec<String>> = t
                .refs
                .iter()
                .enumerate()
                .map(|(i, r)| vec![format!("r{}", i + 1), r.to_string()])
                .collect();
            if let Some((o, p)) = &product {
                rows.push(vec![format!("product {o}"), p.to_string()]);
            }
            csv_table(&["name", "word"], &rows)?
        }
    };
    Ok(produced(EXIT_OK, body))
}

/// Whether `ord` is a cyclic rotation of the fork ordering of `b` and `w` is
/// fork-preserving, i.e. admissibility is guaranteed.
fn within_fork_hypotheses(b: &ExchangeMatrix, ord: &LinearOrdering, w: &MutationSequence) -> R<bool> {
    let Some(cert) = find_point_of_return(b) else {
        return Ok(false);
    };
    if !is_fork_preserving(b, w)?.preserving {
        return Ok(false);
    }
    let base = fork_linear_ordering(&cert, b)?;
    Ok((0..b.n()).any(|s| base.rotated_by(s) == *ord))
}

fn gim(c: &Common) -> R<Produced> {
    let b = quiver(c)?;
    let w = sequence(c, b.n())?;
    let ord = ordering(c, &b)?;
    let (g, seed) = apply_gim_sequence(&b, &ord, &w)?;
    let violation = admissibility_violation(&g, &seed.b)?;
    let within = within_fork_hypotheses(&b, &ord, &w)?;
    let code = if violation.is_some() && within { EXIT_FINDING } else { EXIT_OK };
    let body = match c.format {
        Format::Table => {
            let mut s = format!("ordering {ord}, sequence {w}\n{}", g.a);
            match &violation {
                None => s.push_str("admissible: true\n"),
                Some(v) => s.push_str(&format!("admissible: false ({v})\n")),
            }
            s.push_str(&format!("within fork hypotheses: {within}\n"));
            s
        }
        Format::Json => json(&json!({
            "ordering": ord,
            "sequence": w,
            "gim": g.a,
            "admissible": violation.is_none(),
            "violation": violation,
            "within_hypotheses": within,
        })),
        Format::Csv => output::matrix_csv(&g.a, "a")?,
    };
    Ok(produced(code, body))
}

fn sign_invariance(c: &Common, pair: Option<&str>) -> R<Produced> {
    let pair = pair.ok_or_else(|| input("--pair A,B is required"))?;
    let names: Vec<&str> = pair.split(',').map(str::trim).collect();
    let [a, b] = names.as_slice() else {
        return Err(input(format!("--pair expects two quivers, got {pair:?}")));
    };
    let (b1, b2) = (load_quiver(a)?, load_quiver(b)?);
    let w = sequence(c, b1.n())?;
    finish_report(c, verify_sign_invariance(&b1, &b2, &w)?, None)
}

fn l_c(c: &Common) -> R<Produced> {
    let b = quiver(c)?;
    let w = sequence(c, b.n())?;
    let report = match find_point_of_return(&b) {
        Some(cert) => {
            let ord = ordering(c, &b)?;
            verify_l_c_relation(&b, &cert, &ord, &w)?
        }
        None => {
            let ord = ordering(c, &b)?;
            verify_l_c_magnitudes(&b, &ord, &w)?
        }
    };
    finish_report(c, report, None)
}

fn coxeter(c: &Common, lambda: Option<&str>, rho: Option<&str>) -> R<Produced> {
    let b = quiver(c)?;
    let w = sequence(c, b.n())?;
    let check = match (lambda, rho) {
        (Some(l), Some(r)) => {
            coxeter_product_check_with(&b, &w, &parse_ordering(l, b.n())?, &parse_ordering(r, b.n())?)?
        }
        (None, None) => coxeter_product_check(&b, &w)?,
        _ => return Err(input("--lambda and --rho must be given together")),
    };
    let mut report = VerificationReport::new(json!({
        "quiver": b,
        "sequence": w,
        "lambda": check.lambda_order,
        "rho": check.rho_order,
        "within_hypotheses": check.within_hypotheses,
    }));
    report.push(Check::new(
        "coxeter",
        check.equal,
        format!(
            "lambda {} gives {}, rho {} gives {}",
            check.lambda_order, check.lambda_product_word, check.rho_order, check.rho_product_word
        ),
    ));
    finish_report(c, report, None)
}

fn cyclic(c: &Common, depth: usize) -> R<Produced> {
    let b = quiver(c)?;
    let descent = rank3_descent(&b)?;
    let bfs = rank3_reaches_acyclic(&b, depth)?;
    let mut report = VerificationReport::new(json!({ "quiver": b, "depth": depth }));
    report.push(Check::new(
        "descent",
        true,
        if descent.cyclic {
            format!("cyclic; stopped after {}", descent.path)
        } else {
            format!("acyclic after {}", descent.path)
        },
    ));
    // A cyclic verdict is contradicted by any acyclic quiver the BFS finds.
    let agree = !(descent.cyclic && bfs.is_some());
    let detail = match &bfs {
        Some(p) => format!("acyclic quiver reached by {p}"),
        None => format!("no acyclic quiver within depth {depth}"),
    };
    report.push(Check::new("bfs-agrees", agree, detail));
    report.instance["cyclic"] = json!(descent.cyclic);
    finish_report(c, report, None)
}

fn walk(c: &Common, n: usize, max_weight: u32, length: usize) -> R<Produced> {
    let random = c.quiver.is_none() || c.seq.is_none();
    let seed = if random { Some(rng_seed(c)?) } else { None };
    let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
    let b = match &c.quiver {
        Some(q) => load_quiver(q)?,
        None => random_fork_with(&mut rng, n, max_weight)?,
    };
    let w = match &c.seq {
        Some(_) => sequence(c, b.n())?,
        None => {
            let cert = find_point_of_return(&b)
                .ok_or_else(|| input("quiver is not a fork; pass --seq"))?;
            random_fork_preserving_sequence(&mut rng, b.n(), cert.point_of_return, length)
        }
    };
    let ord = match (&c.ordering, find_point_of_return(&b)) {
        (Some(s), _) => Some(parse_ordering(s, b.n())?),
        (None, Some(cert)) => Some(fork_linear_ordering(&cert, &b)?),
        (None, None) => None,
    };
    let mut steps = Vec::new();
    let mut seed_state = cvec_core::FramedSeed::new(b.clone());
    let mut state = ord.as_ref().map(|o| cvec_core::WalkState::new(&b, o)).transpose()?;
    let snapshot = |i: usize, k: Option<usize>, s: &cvec_core::FramedSeed, st: &Option<cvec_core::WalkState>| -> R<serde_json::Value> {
        let mut v = json!({
            "step": i,
            "vertex": k.map(|k| k + 1),
            "b": s.b.matrix(),
            "c": s.c,
            "signs": s.sign_vector()?.signs(),
        });
        if let Some(st) = st {
            v["gim"] = json!(st.gim.a);
            v["l"] = json!(st.l);
        }
        Ok(v)
    };
    steps.push(snapshot(0, None, &seed_state, &state)?);
    for (i, &k) in w.indices().iter().enumerate() {
        seed_state = seed_state.mutate(k)?;
        if let Some(st) = state.as_mut() {
            st.step(k)?;
        }
        steps.push(snapshot(i + 1, Some(k), &seed_state, &state)?);
    }
    let body = match c.format {
        Format::Json => json(&json!({
            "quiver": b,
            "sequence": w,
            "ordering": ord,
            "rng_seed": seed,
            "steps": steps,
        })),
        Format::Csv => {
            let rows: Vec<Vec<String>> = steps
                .iter()
                .map(|s| {
                    vec![
                        s["step"].to_string(),
                        s["vertex"].as_u64().map_or(String::new(), |v| v.to_string()),
                        s["signs"].to_string(),
                        s["c"].to_string(),
                    ]
                })
                .collect();
            csv_table(&["step", "vertex", "signs", "c"], &rows)?
        }
        Format::Table => {
            let mut s = String::new();
            if let Some(seed) = seed {
                s.push_str(&format!("rng seed {seed}\n"));
            }
            s.push_str(&format!("sequence {w}\n"));
            if let Some(o) = &ord {
                s.push_str(&format!("ordering {o}\n"));
            }
            let mut replay = cvec_core::FramedSeed::new(b.clone());
            s.push_str(&format!("step 0\n{}", replay.render()));
            for (i, &k) in w.indices().iter().enumerate() {
                replay = replay.mutate(k)?;
                s.push_str(&format!(
                    "step {} at vertex {}: signs {}\n{}",
                    i + 1,
                    k + 1,
                    replay.sign_vector()?,
                    replay.render()
                ));
            }
            if let Some(st) = &state {
                s.push_str(&format!("final GIM\n{}final L\n{}", st.gim.a, st.l));
            }
            s
        }
    };
    let mut p = produced(EXIT_OK, body);
    p.rng_seed = seed;
    Ok(p)
}

/// Vertex sequence `[v, 1, w]` with an arrow from vertex 1 to `v`.
fn default_sigma(b: &ExchangeMatrix) -> R<FamilyLabeling> {
    let v = (1..3)
        .find(|&j| b.has_arrow(0, j))
        .ok_or_else(|| input("vertex 1 has no outgoing arrow; pass --sigma"))?;
    Ok(FamilyLabeling::new([v, 0, 3 - v])?)
}

fn curves(c: &Common, sigma: Option<&str>, bound: usize) -> R<Produced> {
    let b = quiver(c)?;
    if b.n() != 3 {
        return Err(cvec_core::Error::NotRank3 { n: b.n() }.into());
    }
    if !b.is_abundant() || b.is_acyclic() {
        return Err(input("curves need an abundant cyclic rank-3 quiver"));
    }
    let w = sequence(c, 3)?;
    let lab: FamilyLabeling = match sigma {
        Some(s) => s.parse()?,
        None => default_sigma(&b)?,
    };
    let t = reflections_along(&b, &w)?;
    let family = curves_for_reflections(&t.refs, &lab, bound)?;
    let planar = non_crossing(&family.curves);
    let svg = render_svg(&family.curves, Window::around(&family.curves));
    let words: Vec<String> = t.refs.iter().map(ToString::to_string).collect();
    let body = match c.format {
        Format::Table => {
            let mut s = format!("sigma {lab}, sequence {w}\n");
            for (i, (word, p)) in words.iter().zip(&family.curves).enumerate() {
                s.push_str(&format!("curve {}: word {word}, {} -> {}\n", i + 1, p.start(), p.end()));
            }
            s.push_str(&format!(
                "non-crossing: {planar}\ntorus non-crossing: {}\n",
                family.torus_non_crossing
            ));
            s
        }
        Format::Json => json(&json!({
            "sigma": lab,
            "sequence": w,
            "bound": bound,
            "words": t.refs.iter().map(|r| r.word()).collect::<Vec<_>>(),
            "curves": family.curves,
            "non_crossing": planar,
            "torus_non_crossing": family.torus_non_crossing,
        })),
        Format::Csv => {
            let rows: Vec<Vec<String>> = words
                .iter()
                .zip(&family.curves)
                .enumerate()
                .map(|(i, (word, p))| vec![(i + 1).to_string(), word.clone(), p.start().to_string(), p.end().to_string()])
                .collect();
            csv_table(&["curve", "word", "start", "end"], &rows)?
        }
    };
    let code = if planar { EXIT_OK } else { EXIT_FINDING };
    Ok(Produced {
        code,
        body,
        summary: None,
        artifact: Some(svg),
        rng_seed: None,
        passed: planar,
    })
}
