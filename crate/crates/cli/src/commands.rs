use anyhow::{bail, Context, Result};
use forestcalc::fermion::{
    coloring_count, coloring_count_for, gram_bound_check, pressure_series_bruteforce, pressure_series_tree, sign_audit,
    valid_arrows, ColoringRule, ExponentSign, GrassmannModelFile,
};
use forestcalc::forest::{enumerate_forests, enumerate_trees};
use forestcalc::forest_formula::{verify_identity, FormulaRule};
use forestcalc::gaussian::{cluster_expansion, partition_series, verify_factorization, BoxModel, BoxModelFile};
use forestcalc::mayer::{
    connected_coefficient_graphs_pattern, connected_coefficient_tree_pattern, finite_volume_pressure, mayer_log_series,
    partition_polynomial, verify_mayer, OverlapPattern, PolymerGas,
};
use forestcalc::propagator::{
    covariance_matrix_from_kernel, decay_bound_fit_with, default_grid, slice_kernel, SliceSpec,
};
use forestcalc::rational::{format_rational, parse_rational, rat};
use forestcalc::symbolic::FormalSeries;
use forestcalc::weakening::{
    block_sum, convex_block_decomposition, is_positive_semidefinite, Rule, WeakeningMatrix, WeightAssignment,
};
use forestcalc::Rational;
use serde_json::json;

use crate::input;
use crate::report::{failure_as_check, Check, Recorder};
use crate::{
    ClusterArgs, FermionArgs, ForestFormulaArgs, MayerArgs, PropagatorArgs, RuleChoice, SignChoice, TreesArgs,
    WeakenArgs, WeakenRule,
};

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

fn difference(a: &FormalSeries, b: &FormalSeries) -> Vec<String> {
    strings(a.sub(b).coeffs())
}

pub fn trees(a: &TreesArgs, rec: &mut Recorder) -> Result<()> {
    let trees = rec.timed("enumerate", |_| enumerate_trees(a.n))?;
    let expected = if a.n < 2 { 1 } else { a.n.pow(a.n as u32 - 2) };
    rec.put("count", trees.len())?;
    rec.check(Check::from_bool(
        "cayley count",
        trees.len() == expected,
        format!("{} trees, n^(n-2) = {expected}", trees.len()),
    ));
    if !a.count_only {
        rec.put("trees", trees.iter().map(|t| t.links()).collect::<Vec<_>>())?;
    }
    Ok(())
}

pub fn weaken(a: &WeakenArgs, rec: &mut Recorder) -> Result<()> {
    let forest = input::forest(&input::load_json(&a.forest)?, a.n)?;
    let weights = input::rationals(&input::load_json(&a.weights)?)?;
    let w = WeightAssignment::new(&forest, weights)?;
    let rule = match a.rule {
        WeakenRule::Symmetric => Rule::Symmetric,
        WeakenRule::Rooted => Rule::Rooted,
    };
    let wm = WeakeningMatrix::build(&forest, &w, rule)?;
    let cert = is_positive_semidefinite(&wm.matrix)?;
    rec.put("n", forest.n())?;
    rec.put("links", forest.links())?;
    rec.put("rule", rule)?;
    rec.put("weights", strings(w.weights()))?;
    rec.put("matrix", &wm.matrix)?;
    rec.put("certificate", &cert)?;
    // only the symmetric matrix is positive in general
    if rule == Rule::Symmetric {
        rec.check(Check::from_bool(
            "positive semidefinite",
            cert.is_psd,
            format!("pivots {:?}", strings(&cert.pivots)),
        ));
        let terms = convex_block_decomposition(&forest, &w)?;
        let rebuilt = block_sum(forest.n(), &terms);
        rec.put("block_decomposition", &terms)?;
        rec.check(Check::from_bool(
            "block decomposition",
            rebuilt == wm.matrix,
            format!("{} terms", terms.len()),
        ));
    }
    Ok(())
}

pub fn forest_formula(a: &ForestFormulaArgs, seed: u64, rec: &mut Recorder) -> Result<()> {
    let rules: Vec<FormulaRule> = match a.rule {
        RuleChoice::All => FormulaRule::ALL.to_vec(),
        RuleChoice::Symmetric => vec![FormulaRule::Symmetric],
        RuleChoice::Rooted => vec![FormulaRule::Rooted],
        RuleChoice::Ordered => vec![FormulaRule::Ordered],
    };
    let report = rec.timed("forest sums", |_| {
        verify_identity(a.n, a.degree, a.trials, seed, &rules)
    })?;
    let expected: Vec<String> = report.trials.iter().map(|t| t.expected.clone()).collect();
    let mut per_rule = serde_json::Map::new();
    for rule in &rules {
        let sums: Vec<String> = report
            .trials
            .iter()
            .map(|t| match rule {
                FormulaRule::Symmetric => t.symmetric.clone(),
                FormulaRule::Rooted => t.rooted.clone(),
                FormulaRule::Ordered => t.ordered.clone(),
            })
            .collect();
        let residuals = sums
            .iter()
            .zip(&expected)
            .map(|(s, e)| Ok(format_rational(&(parse_rational(s)? - parse_rational(e)?))))
            .collect::<Result<Vec<_>>>()?;
        let failed = residuals.iter().filter(|r| *r != "0").count();
        let name = serde_json::to_value(rule)?.as_str().unwrap_or_default().to_string();
        rec.check(
            Check::from_bool(
                format!("{name} forest sum = H(1)"),
                failed == 0,
                format!("{failed} of {} trials differ", sums.len()),
            )
            .with_residuals(residuals),
        );
        per_rule.insert(name, json!(sums));
    }
    rec.put("trials", report.trials.len())?;
    rec.put("failures", report.failures)?;
    rec.put("expected", expected)?;
    rec.put("sums", per_rule)?;
    rec.put("polynomials", report.trials.iter().map(|t| &t.h).collect::<Vec<_>>())?;
    Ok(())
}

pub fn cluster(a: &ClusterArgs, rec: &mut Recorder) -> Result<()> {
    let mut file: BoxModelFile = input::load(&a.model)?;
    if let Some(order) = a.order {
        file.order = order;
    }
    let model = BoxModel::try_from(file)?;
    let z = rec.timed("partition series", |_| partition_series(&model))?;
    let acts = rec.timed("activities", |_| cluster_expansion(&model))?;
    rec.put("boxes", model.boxes())?;
    rec.put("order", model.order())?;
    rec.put("partition_series", strings(z.coeffs()))?;
    rec.put(
        "activities",
        acts.activities
            .iter()
            .map(|(y, s)| json!({ "boxes": y, "series": strings(s.coeffs()) }))
            .collect::<Vec<_>>(),
    )?;
    if a.verify {
        let fact = rec.timed("factorization", |_| verify_factorization(&model));
        match failure_as_check("cluster factorization", fact)? {
            Ok(r) => rec.check(
                Check::from_bool(
                    "cluster factorization",
                    true,
                    format!("{} set partitions", r.partitions),
                )
                .with_residuals(r.residuals),
            ),
            Err(c) => rec.check(c),
        }
        let p = rec.timed("pressure", |_| finite_volume_pressure(&model))?;
        rec.put("pressure", strings(p.direct.coeffs()))?;
        let residuals = difference(&p.via_mayer, &p.direct);
        rec.check(
            Check::from_bool(
                "pressure via mayer series = (1/n) log Z",
                p.via_mayer == p.direct,
                format!("{} boxes", p.boxes),
            )
            .with_residuals(residuals),
        );
    }
    Ok(())
}

pub fn mayer(a: &MayerArgs, rec: &mut Recorder) -> Result<()> {
    let n: usize = a
        .lattice
        .strip_prefix("1d:")
        .context("lattice must look like 1d:<n>")?
        .parse()
        .context("lattice size")?;
    let activity = parse_rational(&a.activity)?;
    let gas = PolymerGas::intervals(n, a.polymer_max, activity)?;
    rec.put("boxes", n)?;
    rec.put("polymers", gas.polymers())?;
    rec.put("grade", a.grade)?;
    if a.verify {
        let result = rec.timed("mayer series", |_| verify_mayer(&gas, a.grade));
        match failure_as_check("exp(mayer series) = Z_r", result)? {
            Ok(r) => {
                rec.put("log_series", &r.log_series)?;
                rec.put("partition_polynomial", &r.partition_polynomial)?;
                rec.check(Check::from_bool("exp(mayer series) = Z_r", true, "").with_residuals(r.residuals));
            }
            Err(c) => rec.check(c),
        }
        let kmax = a.grade.clamp(1, 4);
        let mut mismatches = Vec::new();
        let mut patterns = 0;
        rec.timed("connected coefficients", |_| -> Result<()> {
            for k in 1..=kmax {
                for p in OverlapPattern::all(k)? {
                    patterns += 1;
                    let (t, g) = (
                        connected_coefficient_tree_pattern(&p)?,
                        connected_coefficient_graphs_pattern(&p)?,
                    );
                    if t != g {
                        mismatches.push(format!(
                            "{:?}: tree {}, graphs {}",
                            p.edges(),
                            format_rational(&t),
                            format_rational(&g)
                        ));
                    }
                }
            }
            Ok(())
        })?;
        rec.check(Check::from_bool(
            "tree formula = connected graphs",
            mismatches.is_empty(),
            if mismatches.is_empty() {
                format!("{patterns} overlap patterns, k <= {kmax}")
            } else {
                mismatches.join("; ")
            },
        ));
    } else {
        let log = rec.timed("mayer series", |_| mayer_log_series(&gas, a.grade))?;
        rec.put("log_series", strings(&log))?;
        rec.put("partition_polynomial", strings(&partition_polynomial(&gas, a.grade)))?;
    }
    Ok(())
}

pub fn fermion(a: &FermionArgs, rec: &mut Recorder) -> Result<()> {
    let file: GrassmannModelFile = input::load(&a.propagator)?;
    if file.sites != a.sites {
        bail!("--sites {} but the propagator file has {} sites", a.sites, file.sites);
    }
    let sign = match a.sign {
        SignChoice::Plus => ExponentSign::Plus,
        SignChoice::Minus => ExponentSign::Minus,
    };
    let model = file.into_model(a.colors, Some(a.order), sign)?;
    let tree = rec.timed("tree expansion", |_| pressure_series_tree(&model))?;
    rec.put("sites", model.sites())?;
    rec.put("colors", model.colors())?;
    rec.put("order", model.order())?;
    rec.put("sign", model.sign())?;
    rec.put("pressure", strings(tree.coeffs()))?;
    if a.verify {
        let brute = rec.timed("grassmann integration", |_| pressure_series_bruteforce(&model))?;
        rec.check(
            Check::from_bool(
                "tree expansion = grassmann integration",
                tree == brute,
                format!("orders 1..={}", model.order()),
            )
            .with_residuals(difference(&tree, &brute)),
        );
        rec.timed("colorings", |rec| -> Result<()> {
            let nmax = model.order().min(4);
            let mut bad = Vec::new();
            for n in 1..=nmax {
                let filter = (model.colors() as u64).pow(2 * n as u32) << n <= 1 << 20;
                for t in enumerate_trees(n)? {
                    for arrows in valid_arrows(&t) {
                        let climb = coloring_count_for(&t, &arrows, model.colors(), ColoringRule::LayerClimbing)?;
                        let ok = climb == coloring_count(n, model.colors())
                            && (!filter
                                || coloring_count_for(&t, &arrows, model.colors(), ColoringRule::Filter)? == climb);
                        if !ok {
                            bad.push(format!("n = {n}, links {:?}, arrows {arrows:?}", t.links()));
                        }
                    }
                }
            }
            rec.check(Check::from_bool(
                "coloring count = 2^n N^(n+1)",
                bad.is_empty(),
                if bad.is_empty() {
                    format!("n <= {nmax}")
                } else {
                    bad.join("; ")
                },
            ));
            Ok(())
        })?;
        if model.sites() <= 5 {
            let fact = model.factorization_or_trivial();
            let mut worst: f64 = 0.0;
            let mut failure = None;
            for forest in enumerate_forests(model.sites())? {
                let weights = (0..forest.len()).map(|k| rat((k as i64 % 3) + 1, 4)).collect();
                let w = WeightAssignment::new(&forest, weights)?;
                match failure_as_check("gram bound", gram_bound_check(&fact, &forest, &w))? {
                    Ok(r) => worst = worst.max(r.ratio),
                    Err(c) => failure = Some(c),
                }
            }
            rec.check(failure.unwrap_or_else(|| {
                Check::from_bool("gram bound", true, format!("largest |det B| / bound = {worst:.6}"))
            }));
        }
    }
    if a.sign_audit {
        let mut rows = Vec::new();
        for n in 1..=model.order() {
            for r in sign_audit(n)? {
                rows.push(json!({ "n": n, "row": r }));
            }
        }
        rec.put("sign_audit", rows)?;
    }
    Ok(())
}

pub fn propagator(a: &PropagatorArgs, rec: &mut Recorder) -> Result<()> {
    let (spec, scale) = if a.slice == "single" {
        (SliceSpec::single_scale(a.dim, a.ratio)?, 1.0)
    } else {
        let j: u32 = a.slice.parse().context("--slice takes an index or `single`")?;
        (
            SliceSpec::slice_index(a.dim, a.ratio, j, a.mass)?,
            a.ratio.powi(-(j as i32)),
        )
    };
    rec.put("spec", spec)?;
    let kernel = rec.timed("kernel", |_| {
        default_grid()
            .into_iter()
            .map(|r| Ok(json!({ "r": r * scale, "value": slice_kernel(&spec, r * scale)? })))
            .collect::<forestcalc::Result<Vec<_>>>()
    })?;
    rec.put("kernel", kernel)?;
    if a.fit_decay {
        let conventions = [("dimensional", a.dim as f64 - 2.0), ("m_squared", 2.0)];
        let mut fits = serde_json::Map::new();
        for (name, exponent) in conventions {
            let sweep = rec.timed(&format!("decay fit {name}"), |_| {
                (0..=a.j_max)
                    .map(|j| {
                        let s = SliceSpec::slice_index(a.dim, a.ratio, j, a.mass)?;
                        let radii: Vec<f64> = default_grid().iter().map(|r| r * a.ratio.powi(-(j as i32))).collect();
                        decay_bound_fit_with(&s, &radii, exponent)
                    })
                    .collect::<forestcalc::Result<Vec<_>>>()
            })?;
            let max = sweep.iter().map(|f| f.k).fold(f64::MIN, f64::max);
            let min = sweep.iter().map(|f| f.k).fold(f64::MAX, f64::min);
            fits.insert(
                name.to_string(),
                json!({ "prefactor_exponent": exponent, "fits": sweep, "spread": max / min }),
            );
        }
        rec.put("decay_fit", fits)?;
    }
    if let Some(centers) = &a.emit_covariance {
        let centers: Vec<Vec<f64>> = input::load(centers)?;
        let generated = rec.timed("covariance", |_| {
            covariance_matrix_from_kernel(&spec, &centers, a.denominator, a.shift_tolerance)
        })?;
        let file = BoxModelFile {
            boxes: centers.len(),
            covariance: generated.matrix.to_strings(),
            order: a.order,
        };
        rec.check(Check::from_bool(
            "emitted covariance is positive semidefinite",
            generated.certificate.is_psd,
            format!("diagonal shift {}", format_rational(&generated.shift)),
        ));
        rec.put("covariance", &file)?;
        rec.put("certificate", &generated.certificate)?;
        rec.put("shift", format_rational(&generated.shift))?;
        if let Some(path) = &a.covariance_out {
            std::fs::write(path, serde_json::to_string_pretty(&file)? + "\n")
                .with_context(|| format!("writing {}", path.display()))?;
            rec.artifacts.push(path.display().to_string());
        }
    }
    Ok(())
}
