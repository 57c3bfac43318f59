use anyhow::Result;
use forestcalc::fermion::{
    coloring_count, coloring_count_for, gram_bound_check, pressure_series_bruteforce, pressure_series_tree,
    radius_probe, two_site_model, valid_arrows, ColoringRule, GramFactorization, GrassmannModel,
};
use forestcalc::forest::{enumerate_forests, enumerate_trees, Forest};
use forestcalc::forest_formula::{verify_identity, FormulaRule};
use forestcalc::gaussian::{partition_series, verify_factorization, BoxModel};
use forestcalc::matrix::random_psd;
use forestcalc::mayer::{
    connected_coefficient_graphs_pattern, connected_coefficient_tree_pattern, verify_mayer, OverlapPattern, PolymerGas,
};
use forestcalc::propagator::{decay_sweep, default_grid};
use forestcalc::rational::{format_rational, int, rat};
use forestcalc::weakening::{
    block_sum, convex_block_decomposition, hadamard_product, is_positive_semidefinite, Rule, WeakeningMatrix,
    WeightAssignment,
};
use forestcalc::{QMatrix, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::report::{failure_as_check, Check, Recorder};

struct Scale {
    quick: bool,
}

impl Scale {
    fn pick<T>(&self, full: T, quick: T) -> T {
        if self.quick {
            quick
        } else {
            full
        }
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn unit_weight(rng: &mut impl Rng) -> Rational {
    let den = rng.gen_range(1i64..=12);
    rat(rng.gen_range(0..=den), den)
}

pub fn run(quick: bool, seed: u64, rec: &mut Recorder) -> Result<()> {
    let s = Scale { quick };
    type Criterion = fn(&Scale, u64) -> Result<Check>;
    let criteria: [(&str, Criterion); 11] = [
        ("1 cayley counts", cayley),
        ("2 forest formula", forest_formula),
        ("3 weakening positivity", weakening),
        ("4 hadamard positivity", hadamard),
        ("5 cluster factorization", cluster),
        ("6 zero-dimensional oracle", zero_dim),
        ("7 mayer equivalence", mayer),
        ("8 fermionic oracle", fermion),
        ("9 gram sweep", gram),
        ("10 uniform radius probe", radius),
        ("11 decay bound fit", decay),
    ];
    for (i, (name, f)) in criteria.iter().enumerate() {
        let mut check = rec.timed(name, |_| f(&s, seed.wrapping_add(i as u64)))?;
        check.name = name.to_string();
        rec.check(check);
    }
    rec.put("quick", quick)?;
    Ok(())
}

fn cayley(s: &Scale, _: u64) -> Result<Check> {
    let top = s.pick(7, 6);
    let mut counts = Vec::new();
    let mut ok = true;
    for n in 2..=top {
        let c = enumerate_trees(n)?.len();
        ok &= c == n.pow(n as u32 - 2);
        counts.push(c.to_string());
    }
    Ok(Check::from_bool(
        "",
        ok,
        format!("n = 2..={top}: {}", counts.join(", ")),
    ))
}

fn forest_formula(s: &Scale, seed: u64) -> Result<Check> {
    let trials = s.pick(50, 5);
    let mut failures = 0;
    for n in 2..=4 {
        failures += verify_identity(n, 3, trials, seed + n as u64, &FormulaRule::ALL)?.failures;
    }
    Ok(Check::from_bool(
        "",
        failures == 0,
        format!("n = 2..=4, {trials} polynomials each, {failures} failures"),
    ))
}

fn weakening(s: &Scale, seed: u64) -> Result<Check> {
    let (top, per) = s.pick((6, 200), (4, 10));
    let mut total = 0;
    let mut bad = Vec::new();
    for n in 1..=top {
        let forests = enumerate_forests(n)?;
        let results = forests
            .par_iter()
            .enumerate()
            .map(|(i, f)| -> Result<Option<String>> {
                let mut r = rng(seed, (n * 1_000_000 + i) as u64);
                for _ in 0..per {
                    let w = WeightAssignment::new(f, (0..f.len()).map(|_| unit_weight(&mut r)).collect())?;
                    let m = WeakeningMatrix::build(f, &w, Rule::Symmetric)?.matrix;
                    let psd = is_positive_semidefinite(&m)?.is_psd;
                    let rebuilt = block_sum(n, &convex_block_decomposition(f, &w)?) == m;
                    if !psd || !rebuilt {
                        return Ok(Some(format!("links {:?} weights {:?}", f.links(), w.weights())));
                    }
                }
                Ok(None)
            })
            .collect::<Result<Vec<_>>>()?;
        total += forests.len() * per;
        bad.extend(results.into_iter().flatten());
    }
    Ok(Check::from_bool(
        "",
        bad.is_empty(),
        if bad.is_empty() {
            format!("{total} weighted forests on n <= {top}")
        } else {
            bad.join("; ")
        },
    ))
}

fn hadamard(s: &Scale, seed: u64) -> Result<Check> {
    let pairs = s.pick(500, 50);
    let mut r = rng(seed, 0);
    for _ in 0..pairs {
        let n = r.gen_range(1..=5);
        let (a, b) = (random_psd(n, &mut r), random_psd(n, &mut r));
        if !is_positive_semidefinite(&hadamard_product(&a, &b)?)?.is_psd {
            return Ok(Check::fail("", format!("{a:?} ∘ {b:?}")));
        }
    }
    Ok(Check::from_bool("", true, format!("{pairs} pairs, dimension <= 5")))
}

fn cluster(s: &Scale, seed: u64) -> Result<Check> {
    let models = s.pick(20, 4);
    let mut r = rng(seed, 0);
    for _ in 0..models {
        let n = r.gen_range(1..=4);
        let model = BoxModel::new(random_psd(n, &mut r), 2)?;
        if let Err(c) = failure_as_check("", verify_factorization(&model))? {
            return Ok(c);
        }
    }
    Ok(Check::from_bool(
        "",
        true,
        format!("{models} covariances, n <= 4, through λ²"),
    ))
}

fn zero_dim(_: &Scale, _: u64) -> Result<Check> {
    let log = partition_series(&BoxModel::new(QMatrix::identity(1), 2)?)?.log()?;
    let ok = log.coeff(1) == int(-3) && log.coeff(2) == int(48);
    Ok(Check::from_bool(
        "",
        ok,
        format!(
            "log Z = {} λ + {} λ²",
            format_rational(&log.coeff(1)),
            format_rational(&log.coeff(2))
        ),
    ))
}

fn mayer(s: &Scale, seed: u64) -> Result<Check> {
    let (kmax, random) = s.pick((4, 100), (3, 10));
    let mut patterns = 0;
    for k in 1..=kmax {
        for p in OverlapPattern::all(k)? {
            patterns += 1;
            if connected_coefficient_tree_pattern(&p)? != connected_coefficient_graphs_pattern(&p)? {
                return Ok(Check::fail("", format!("pattern {:?}", p.edges())));
            }
        }
    }
    let mut r = rng(seed, 0);
    for _ in 0..random {
        let p = OverlapPattern::random(5, 0.5, &mut r)?;
        if connected_coefficient_tree_pattern(&p)? != connected_coefficient_graphs_pattern(&p)? {
            return Ok(Check::fail("", format!("pattern {:?}", p.edges())));
        }
    }
    let gas = PolymerGas::intervals(5, 3, rat(1, 3))?;
    if let Err(c) = failure_as_check("", verify_mayer(&gas, 4))? {
        return Ok(c);
    }
    Ok(Check::from_bool(
        "",
        true,
        format!("{patterns} patterns k <= {kmax}, {random} at k = 5, exp(log) = Z_r through grade 4"),
    ))
}

fn fermion(s: &Scale, _: u64) -> Result<Check> {
    let (order, nmax) = s.pick((3, 4), (2, 3));
    for colors in 1..=3 {
        let models = [
            GrassmannModel::new(QMatrix::identity(1), colors, order)?,
            two_site_model(colors, order)?,
        ];
        for m in &models {
            let (tree, brute) = (pressure_series_tree(m)?, pressure_series_bruteforce(m)?);
            if tree != brute {
                return Ok(Check::fail(
                    "",
                    format!(
                        "{} sites, N = {colors}: residual {:?}",
                        m.sites(),
                        tree.sub(&brute).coeffs()
                    ),
                ));
            }
        }
    }
    for n in 1..=nmax {
        for colors in 1..=3 {
            for t in enumerate_trees(n)? {
                for a in valid_arrows(&t) {
                    for rule in [ColoringRule::LayerClimbing, ColoringRule::Filter] {
                        if coloring_count_for(&t, &a, colors, rule)? != coloring_count(n, colors) {
                            return Ok(Check::fail(
                                "",
                                format!("coloring count n = {n}, N = {colors}, {rule:?}"),
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(Check::from_bool(
        "",
        true,
        format!("1 and 2 sites, N = 1..=3, through order {order}; colorings n <= {nmax}"),
    ))
}

fn random_forest(n: usize, rng: &mut impl Rng) -> Result<Forest> {
    let mut pairs = Vec::new();
    let mut uf: Vec<usize> = (0..=n).collect();
    fn find(uf: &mut [usize], x: usize) -> usize {
        if uf[x] != x {
            uf[x] = find(uf, uf[x]);
        }
        uf[x]
    }
    for i in 1..=n {
        for j in i + 1..=n {
            if rng.gen_bool(0.4) {
                let (a, b) = (find(&mut uf, i), find(&mut uf, j));
                if a != b {
                    uf[a] = b;
                    pairs.push((i, j));
                }
            }
        }
    }
    Ok(Forest::from_pairs(n, &pairs)?)
}

fn gram(s: &Scale, seed: u64) -> Result<Check> {
    let cases = s.pick(500, 50);
    let mut r = rng(seed, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let n = r.gen_range(1..=5);
        let dim = r.gen_range(1..=4);
        let mut vectors = || QMatrix::from_fn(n, dim, |_, _| rat(r.gen_range(-4..=4), r.gen_range(1..=3)));
        let (f, g) = (vectors(), vectors());
        let fact = GramFactorization::from_matrices(&f, &g)?;
        let forest = random_forest(n, &mut r)?;
        let w = WeightAssignment::new(&forest, (0..forest.len()).map(|_| unit_weight(&mut r)).collect())?;
        match failure_as_check("", gram_bound_check(&fact, &forest, &w))? {
            Ok(report) => worst = worst.max(report.ratio),
            Err(c) => return Ok(c),
        }
    }
    Ok(Check::from_bool(
        "",
        true,
        format!("{cases} instances, largest ratio {worst:.6}"),
    ))
}

fn radius(s: &Scale, _: u64) -> Result<Check> {
    let order = s.pick(3, 2);
    let models = [1, 2, 4]
        .into_iter()
        .map(|n| two_site_model(n, order))
        .collect::<forestcalc::Result<Vec<_>>>()?;
    match failure_as_check("", radius_probe(&models))? {
        Ok(p) => {
            let roots: Vec<String> = p
                .rows
                .iter()
                .map(|r| format!("N={} n={}: {:.4}", r.colors, r.n, r.root))
                .collect();
            Ok(Check::from_bool(
                "",
                p.all_within_bound,
                format!("envelope K' = {:.4}; {}", p.envelope, roots.join(", ")),
            ))
        }
        Err(c) => Ok(c),
    }
}

fn decay(s: &Scale, _: u64) -> Result<Check> {
    let j_max = s.pick(5, 3);
    let mut parts = Vec::new();
    let mut ok = true;
    for d in [2, 3] {
        let sweep = decay_sweep(d, 2.0, 0.5, j_max, &default_grid())?;
        ok &= sweep.spread <= 2.0 && sweep.fits.iter().all(|f| f.k.is_finite());
        parts.push(format!("d={d} spread {:.4}", sweep.spread));
    }
    Ok(Check::from_bool(
        "",
        ok,
        format!("M = 2, m = 1/2, j <= {j_max}: {}", parts.join(", ")),
    ))
}
