//! Acceptance checks. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero when any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use mpr_core::function_classes::range_constant;
use mpr_core::mpr::linear_mpr_from_rows;
use mpr_core::optimizer::{
    finetune, grad_loss, objective, FunctionBuffer, GeneratorModel, TuneConfig, TuneParams,
};
use mpr_core::oracle::{brute_force_linear, brute_force_tree};
use mpr_core::rng::{derive_seed, rng_from_seed, stream, Rng};
use mpr_core::stats::{
    empirical_rademacher, gap_bound_prop1, gap_experiment, model_compare_test, std_heatmap,
    BootstrapConfig, BoundInputs, GapConfig, HeatmapConfig, PopulationSource,
};
use mpr_core::{
    load_schema, mpr, mpr_exact, mpr_linear, mpr_tree, AttributeSchema, FunctionClassSpec,
    JointDistribution, ReferenceSpec, SampleSet, TreeWitness, Witness,
};
use rand::Rng as _;

type Check = fn() -> Result<String, String>;

fn schema_of(cats: &[usize]) -> Arc<AttributeSchema> {
    let attrs: Vec<String> = cats
        .iter()
        .enumerate()
        .map(|(a, &c)| {
            let names: Vec<String> = (0..c).map(|j| format!("\"c{j}\"")).collect();
            format!(r#"{{"name":"a{a}","categories":[{}]}}"#, names.join(","))
        })
        .collect();
    Arc::new(load_schema(&format!(r#"{{"attributes":[{}]}}"#, attrs.join(","))).unwrap())
}

/// Category counts with at most `max_features` one-hot features in total.
fn random_cats(rng: &mut Rng, max_features: usize) -> Vec<usize> {
    loop {
        let attrs = rng.random_range(1..=3);
        let cats: Vec<usize> = (0..attrs).map(|_| rng.random_range(2..=4)).collect();
        if cats.iter().sum::<usize>() <= max_features {
            return cats;
        }
    }
}

fn random_distribution(schema: &Arc<AttributeSchema>, rng: &mut Rng) -> JointDistribution {
    let cells = schema.joint_cells().unwrap();
    let w: Vec<f64> = cells
        .iter()
        .map(|_| rng.random_range(0.0..1.0f64).powi(2) + 1e-3)
        .collect();
    let total: f64 = w.iter().sum();
    JointDistribution::new(
        schema.clone(),
        cells.into_iter().zip(w.iter().map(|x| x / total)).collect(),
    )
    .unwrap()
}

fn random_sets(schema: &Arc<AttributeSchema>, rng: &mut Rng, max: usize) -> (SampleSet, SampleSet) {
    let dg = random_distribution(schema, rng);
    let dr = random_distribution(schema, rng);
    let k = rng.random_range(1..=max);
    let m = rng.random_range(1..=max);
    (
        dg.sample(k, rng, "g").unwrap(),
        dr.sample(m, rng, "r").unwrap(),
    )
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn oracle_equivalence() -> Result<String, String> {
    let mut rng = rng_from_seed(101);
    let mut compared = 0;
    let mut worst: f64 = 0.0;
    for inst in 0..100 {
        let schema = schema_of(&random_cats(&mut rng, 5));
        let (g, r) = random_sets(&schema, &mut rng, 200);
        for l in 1..=schema.feature_dim().min(3) {
            let exact = mpr_tree(&g, &r, l).map_err(|e| e.to_string())?.value;
            let (brute, _) = brute_force_tree(&g, &r, l).map_err(|e| e.to_string())?;
            worst = worst.max((exact - brute).abs());
            check((exact - brute).abs() <= 1e-12, || {
                format!("instance {inst}, depth {l}: closed form {exact} vs brute force {brute}")
            })?;
            compared += 1;
        }
    }
    Ok(format!(
        "100 instances, {compared} depth comparisons, max |diff| {worst:.1e}"
    ))
}

fn linear_closed_form() -> Result<String, String> {
    let (v, w) = linear_mpr_from_rows(
        &[vec![1.0, 0.0], vec![1.0, 0.0]],
        &[vec![0.0, 1.0], vec![0.0, 1.0]],
    )
    .map_err(|e| e.to_string())?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    check((v - 2f64.sqrt()).abs() <= 1e-12, || {
        format!("raw case value {v}")
    })?;
    check(
        (w[0] - h).abs() <= 1e-12 && (w[1] + h).abs() <= 1e-12,
        || format!("raw case witness {w:?}"),
    )?;

    // one binary attribute, all mass on opposite categories: ‖(2, −2)‖ = 2√2
    let bin = schema_of(&[2]);
    let g = SampleSet::from_cells(bin.clone(), &[vec![0], vec![0]], None, "g").unwrap();
    let r = SampleSet::from_cells(bin, &[vec![1]], None, "r").unwrap();
    let v = mpr_linear(&g, &r).map_err(|e| e.to_string())?.value;
    check((v - 2.0 * 2f64.sqrt()).abs() <= 1e-12, || {
        format!("encoded case value {v}")
    })?;

    let mut rng = rng_from_seed(202);
    let mut worst_ratio: f64 = 1.0;
    for inst in 0..20 {
        let schema = schema_of(&random_cats(&mut rng, 4));
        let (g, r) = random_sets(&schema, &mut rng, 200);
        let exact = mpr_linear(&g, &r).map_err(|e| e.to_string())?.value;
        let probe = brute_force_linear(&g, &r, 100_000, inst).map_err(|e| e.to_string())?;
        check(probe <= exact + 1e-12, || {
            format!("instance {inst}: probe {probe} above closed form {exact}")
        })?;
        if exact > 0.0 {
            let ratio = probe / exact;
            worst_ratio = worst_ratio.min(ratio);
            check(ratio >= 0.99, || {
                format!("instance {inst}: probe {probe} below 99% of {exact}")
            })?;
        }
    }
    Ok(format!(
        "hand-built cases exact; 20 instances, worst probe/closed-form {worst_ratio:.5}"
    ))
}

fn monotonicity() -> Result<String, String> {
    let mut rng = rng_from_seed(303);
    for inst in 0..50 {
        let cats = random_cats(&mut rng, 8);
        let schema = schema_of(&cats);
        let (g, r) = random_sets(&schema, &mut rng, 200);
        let top = schema.feature_dim().min(4);
        let values: Vec<f64> = (1..=top)
            .map(|l| mpr_tree(&g, &r, l).unwrap().value)
            .collect();
        check(values.windows(2).all(|w| w[0] <= w[1] + 1e-12), || {
            format!("instance {inst}: depth sequence {values:?}")
        })?;

        let extra = rng.random_range(2..=3);
        let mut wide_cats = cats.clone();
        wide_cats.push(extra);
        let wide = schema_of(&wide_cats);
        let mut widen = |s: &SampleSet| {
            let cells: Vec<Vec<usize>> = s
                .cells()
                .into_iter()
                .map(|mut c| {
                    c.push(rng.random_range(0..extra));
                    c
                })
                .collect();
            SampleSet::from_cells(wide.clone(), &cells, None, "w").unwrap()
        };
        let (gw, rw) = (widen(&g), widen(&r));
        for l in 1..=top {
            let before = values[l - 1];
            let after = mpr_tree(&gw, &rw, l).unwrap().value;
            check(after >= before - 1e-12, || {
                format!("instance {inst}, depth {l}: adding an attribute lowered MPR {before} → {after}")
            })?;
        }
    }
    Ok("50 instances nondecreasing in depth and under attribute addition".into())
}

fn bound_validity() -> Result<String, String> {
    let g = distribution(&GENERATED);
    let r = distribution(&REFERENCE);
    let mut parts = Vec::new();
    for spec in [FunctionClassSpec::tree(2), FunctionClassSpec::BoundedLinear] {
        let truth = mpr_exact(&g, &r, &spec).map_err(|e| e.to_string())?.value;
        let range = range_constant(&spec, g.schema()).0;
        for (k, m) in [(50usize, 50usize), (200, 200)] {
            let mut failures = 0;
            for t in 0..500u64 {
                let base = derive_seed(404, k as u64, t);
                let gs = g
                    .sample(
                        k,
                        &mut mpr_core::rng::sub_rng(base, stream::DRAW_GENERATED, 0),
                        "g",
                    )
                    .unwrap();
                let rs = r
                    .sample(
                        m,
                        &mut mpr_core::rng::sub_rng(base, stream::DRAW_REFERENCE, 0),
                        "r",
                    )
                    .unwrap();
                let empirical = mpr(&gs, &rs, &spec).unwrap().value;
                let rad_g =
                    empirical_rademacher(&spec, &gs, 100, derive_seed(base, stream::RADEMACHER, 0))
                        .unwrap();
                let rad_r =
                    empirical_rademacher(&spec, &rs, 100, derive_seed(base, stream::RADEMACHER, 1))
                        .unwrap();
                let bound = gap_bound_prop1(&BoundInputs {
                    range,
                    rad_generated: rad_g.value,
                    rad_reference: rad_r.value,
                    k,
                    m,
                    delta: 0.1,
                    ..Default::default()
                })
                .unwrap();
                if (empirical - truth).abs() > bound {
                    failures += 1;
                }
            }
            let rate = failures as f64 / 500.0;
            check(rate <= 0.12, || {
                format!("{} at ({k},{m}): failure rate {rate}", spec.label())
            })?;
            parts.push(format!("{} ({k},{m}) {rate:.3}", spec.label()));
        }
    }
    Ok(format!("failure rates: {}", parts.join(", ")))
}

fn gap_shape() -> Result<String, String> {
    let g = distribution(&GENERATED);
    let r = distribution(&REFERENCE);
    let sizes = [20usize, 100, 500, 2500];
    let classes = vec![
        FunctionClassSpec::tree(1),
        FunctionClassSpec::tree(2),
        FunctionClassSpec::tree(3),
    ];
    let seeds = 20;
    let mut max_dev = vec![vec![0.0; sizes.len()]; classes.len()];
    let mut mean_dev = vec![vec![0.0; sizes.len()]; classes.len()];
    for seed in 0..seeds {
        let config = GapConfig {
            classes: classes.clone(),
            sample_sizes: sizes.to_vec(),
            reps: 30,
            reference_size: None,
            seed,
        };
        let table = gap_experiment(&g, &r, &config).map_err(|e| e.to_string())?;
        for (c, spec) in classes.iter().enumerate() {
            for (s, &n) in sizes.iter().enumerate() {
                let row = table.row(&spec.label(), n).unwrap();
                max_dev[c][s] += row.max_deviation / seeds as f64;
                mean_dev[c][s] += row.mean_deviation / seeds as f64;
            }
        }
    }
    for (c, spec) in classes.iter().enumerate() {
        check(max_dev[c].windows(2).all(|w| w[1] < w[0]), || {
            format!(
                "{}: max deviation {:?} not strictly decreasing",
                spec.label(),
                max_dev[c]
            )
        })?;
    }
    for s in 0..sizes.len() {
        check(mean_dev[2][s] >= mean_dev[0][s], || {
            format!(
                "n = {}: depth-3 mean deviation {} below depth-1 {}",
                sizes[s], mean_dev[2][s], mean_dev[0][s]
            )
        })?;
    }
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.3}"))
            .collect::<Vec<_>>()
            .join("→")
    };
    Ok(format!(
        "{seeds} seeds; mean max deviation depth1 {} depth3 {}",
        fmt(&max_dev[0]),
        fmt(&max_dev[2])
    ))
}

fn heatmap_shape() -> Result<String, String> {
    let g = PopulationSource::Exact(distribution(&GENERATED));
    let r = PopulationSource::Exact(distribution(&REFERENCE));
    let spec = FunctionClassSpec::tree(2);
    let seeds = 20;
    let (mut small, mut large) = (0.0, 0.0);
    for seed in 0..seeds {
        let config = HeatmapConfig {
            k_list: vec![50, 200, 1000],
            m_list: vec![50, 200, 1000],
            bootstrap: BootstrapConfig {
                resample_size: None,
                repetitions: 50,
                joint: true,
                alpha: 0.05,
            },
            seed,
        };
        let table = std_heatmap(&g, &r, &spec, &config).map_err(|e| e.to_string())?;
        check(table.cells.len() == 9, || {
            format!("{} cells", table.cells.len())
        })?;
        small += table.get(50, 50).unwrap().std / seeds as f64;
        large += table.get(1000, 1000).unwrap().std / seeds as f64;
    }
    check(large < small, || {
        format!("std at (1000,1000) {large} not below (50,50) {small}")
    })?;
    Ok(format!(
        "{seeds} seeds; mean std (50,50) {small:.4} vs (1000,1000) {large:.4}"
    ))
}

fn optimizer_scenario() -> Result<String, String> {
    let schema = Arc::new(
        load_schema(
            r#"{"attributes":[{"name":"gender","categories":["male","female"]},{"name":"age","categories":["young","old"]}]}"#,
        )
        .unwrap(),
    );
    let cells = schema.joint_cells().unwrap();
    let skewed = JointDistribution::new(
        schema.clone(),
        cells.into_iter().zip([0.85, 0.05, 0.05, 0.05]).collect(),
    )
    .unwrap();
    let reference = ReferenceSpec::Exact(JointDistribution::uniform(schema).unwrap());
    let mut parts = Vec::new();
    for seed in [0u64, 1, 2] {
        let params = TuneParams {
            seed,
            ..Default::default()
        };
        check(
            params.iterations == 2000
                && params.batch_size == 8
                && params.sample_buffer == 32
                && params.function_buffer == 32
                && params.reg_lambda == 0.5
                && params.spec == FunctionClassSpec::tree(1),
            || format!("unexpected defaults {params:?}"),
        )?;
        let config = TuneConfig {
            params,
            reference: reference.clone(),
        };
        let gen = GeneratorModel::from_distribution(&skewed).unwrap();
        let run = finetune(gen.clone(), &config).map_err(|e| e.to_string())?;
        let last = run.final_record();
        check(last.iteration == 2000, || {
            format!("last evaluation at {}", last.iteration)
        })?;
        check(last.mpr < 0.05, || {
            format!("seed {seed}: final MPR {}", last.mpr)
        })?;
        check(last.loss_drift <= 0.45, || {
            format!("seed {seed}: drift {}", last.loss_drift)
        })?;
        let again = finetune(gen, &config).map_err(|e| e.to_string())?;
        check(again.records == run.records, || {
            format!("seed {seed}: rerun differs")
        })?;
        parts.push(format!(
            "seed {seed}: MPR {:.4} drift {:.3}",
            last.mpr, last.loss_drift
        ));
    }
    Ok(format!("{} (deterministic)", parts.join("; ")))
}

fn gradient_correctness() -> Result<String, String> {
    let schema = schema_of(&[2, 3, 2]);
    let dim = schema.feature_dim();
    let cells = schema.joint_cells().unwrap().len();
    let mut rng = rng_from_seed(808);
    let reference = ReferenceSpec::Exact(random_distribution(&schema, &mut rng));
    let h = 1e-5;
    let (mut points, mut tries) = (0, 0);
    let mut worst: f64 = 0.0;
    while points < 50 {
        tries += 1;
        if tries > 5000 {
            return Err(format!("only {points} non-kink points found"));
        }
        let base: Vec<f64> = (0..cells).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut gen = GeneratorModel::from_logits(schema.clone(), base).unwrap();
        gen.set_logits((0..cells).map(|_| rng.random_range(-2.0..2.0)).collect())
            .unwrap();
        let mut functions = FunctionBuffer::new(8, false).unwrap();
        for _ in 0..rng.random_range(1..=6) {
            let depth = rng.random_range(1..=3);
            let mut features = rand::seq::index::sample(&mut rng, dim, depth).into_vec();
            features.sort_unstable();
            let leaves = (0..1 << depth)
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect();
            let w = Witness::Tree(TreeWitness::new(features, leaves, dim).unwrap());
            functions.push(w, String::new(), gen.encodings());
        }

        // distance to the nearest kink of |·| or of the TV term
        let p = gen.probabilities();
        let q = gen.base_probabilities();
        let targets = mpr_core::optimizer::reference_means(&functions, &reference);
        let gaps = functions.entries().zip(&targets).map(|(e, t)| {
            e.cell_values
                .iter()
                .zip(&p)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                - t
        });
        let near = gaps
            .map(f64::abs)
            .chain(p.iter().zip(&q).map(|(a, b)| (a - b).abs()))
            .fold(f64::INFINITY, f64::min);
        if near <= 1e-3 {
            continue;
        }

        let analytic = grad_loss(&gen, &functions, &reference, 0.5).unwrap();
        let theta = gen.logits().to_vec();
        let at = |gen: &mut GeneratorModel, t: Vec<f64>| {
            gen.set_logits(t).unwrap();
            objective(gen, &functions, &reference, 0.5).unwrap()
        };
        let numeric: Vec<f64> = (0..cells)
            .map(|j| {
                let mut up = theta.clone();
                up[j] += h;
                let mut down = theta.clone();
                down[j] -= h;
                (at(&mut gen, up) - at(&mut gen, down)) / (2.0 * h)
            })
            .collect();
        let scale = numeric.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-8);
        let err = analytic
            .iter()
            .zip(&numeric)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))
            / scale;
        worst = worst.max(err);
        check(err < 1e-4, || {
            format!("point {points}: relative error {err:.2e}")
        })?;
        points += 1;
    }
    Ok(format!(
        "50 points ({tries} drawn), max relative error {worst:.2e}"
    ))
}

fn welch_calibration() -> Result<String, String> {
    let g = distribution(&GENERATED);
    let r = distribution(&REFERENCE).to_weighted_set("r");
    let spec = FunctionClassSpec::tree(1);
    let per_side = 30;
    let replicate = |seed: u64| -> Vec<f64> {
        (0..per_side)
            .map(|i| {
                let s = g
                    .sample(
                        100,
                        &mut mpr_core::rng::sub_rng(seed, stream::DRAW_GENERATED, i),
                        "g",
                    )
                    .unwrap();
                mpr(&s, &r, &spec).unwrap().value
            })
            .collect()
    };
    let pairs = 1000u64;
    let mut rejects = 0;
    for pair in 0..pairs {
        let a = replicate(derive_seed(909, 0, pair));
        let b = replicate(derive_seed(909, 1, pair));
        if model_compare_test(&a, &b, 0.05)
            .map_err(|e| e.to_string())?
            .reject
        {
            rejects += 1;
        }
    }
    let rate = rejects as f64 / pairs as f64;
    check((rate - 0.05).abs() <= 0.02, || {
        format!("false-rejection rate {rate}")
    })?;
    Ok(format!("false-rejection rate {rate:.3} over {pairs} pairs"))
}

fn cli_determinism() -> Result<String, String> {
    let fx = Fixture::new();
    fx.write(
        "tune.json",
        r#"{"schema": "schema.json", "generator": {"male|young|a":0.3,"male|young|b":0.1,"male|young|c":0.05,"male|old|a":0.05,"male|old|b":0.1,"male|old|c":0.1,"female|young|a":0.05,"female|young|b":0.05,"female|young|c":0.05,"female|old|a":0.05,"female|old|b":0.05,"female|old|c":0.05},
            "reference": {"samples": "ref.csv"}, "params": {"iterations": 300, "eval_every": 100, "seed": 4}}"#,
    );
    fx.write(
        "gap.json",
        &format!(
            r#"{{"schema": "schema.json", "generated": {}, "reference": "props.json",
                "classes": [{{"kind":"decision_tree","depth":2}}, {{"kind":"bounded_linear"}}], "sample_sizes": [30, 300], "reps": 10, "seed": 6}}"#,
            proportions_json(&GENERATED)
        ),
    );
    fx.write(
        "heat.json",
        r#"{"schema": "schema.json", "generated": {"samples": "gen.csv"}, "reference": {"proportions": "props.json"},
            "class": {"kind":"decision_tree","depth":2}, "k_list": [50, 300], "m_list": [40, 80],
            "bootstrap": {"resample_size": null, "repetitions": 20, "joint": true}, "seed": 8}"#,
    );
    fx.write("a.txt", "0.30\n0.28\n0.35\n0.31\n");
    fx.write("b.txt", "0.40\n0.38\n0.36\n0.41\n0.37\n");
    fx.write("runs/p1.json", r#"{"results": {"value": 0.2}}"#);
    fx.write(
        "runs/p2.json",
        r#"{"results": {"result": {"point_estimate": 0.35}}}"#,
    );

    let data = fx.data_args();
    let with = |head: &[&str], tail: &[&str]| -> Vec<String> {
        let mut v: Vec<String> = head.iter().map(|s| s.to_string()).collect();
        v.extend(data.iter().cloned());
        v.extend(tail.iter().map(|s| s.to_string()));
        v
    };
    let plain = |args: &[&str]| -> Vec<String> { args.iter().map(|s| s.to_string()).collect() };
    let commands: Vec<(&str, Vec<String>)> = vec![
        ("measure tree", with(&["measure"], &["--depth", "3"])),
        ("measure linear", with(&["measure"], &["--class", "linear"])),
        (
            "bootstrap",
            with(
                &["bootstrap"],
                &["--depth", "2", "--reps", "40", "--joint", "--seed", "12"],
            ),
        ),
        (
            "bound prop1",
            with(
                &["bound", "--which", "prop1"],
                &[
                    "--class",
                    "tree",
                    "--depth",
                    "2",
                    "--rad-trials",
                    "50",
                    "--seed",
                    "3",
                ],
            ),
        ),
        (
            "bound prop2",
            plain(&[
                "bound",
                "--which",
                "prop2",
                "--range",
                "2",
                "--k",
                "500",
                "--m",
                "500",
                "--epsilon",
                "0.3",
                "--prompts",
                "40",
            ]),
        ),
        (
            "bound bernstein",
            plain(&[
                "bound",
                "--which",
                "bernstein",
                "--range",
                "2",
                "--k",
                "500",
                "--m",
                "500",
                "--epsilon",
                "0.5",
                "--prompts",
                "40",
                "--variance-file",
                &fx.arg("a.txt"),
            ]),
        ),
        (
            "test threshold",
            plain(&[
                "test",
                "--threshold",
                "0.4",
                "--replicates",
                &fx.arg("a.txt"),
            ]),
        ),
        (
            "test compare",
            plain(&["test", "--compare", &fx.arg("a.txt"), &fx.arg("b.txt")]),
        ),
        ("tune", plain(&["tune", "--config", &fx.arg("tune.json")])),
        (
            "experiment gap",
            plain(&[
                "experiment",
                "--kind",
                "gap",
                "--config",
                &fx.arg("gap.json"),
            ]),
        ),
        (
            "experiment heatmap",
            plain(&[
                "experiment",
                "--kind",
                "heatmap",
                "--config",
                &fx.arg("heat.json"),
            ]),
        ),
        ("report", plain(&["report", "--runs", &fx.arg("runs")])),
    ];
    for (name, args) in &commands {
        let first = run_env(args, &[("MPR_THREADS", "1")]);
        check(first.status.success(), || {
            format!("{name}: exit {:?}: {}", first.status.code(), stderr(&first))
        })?;
        let a = stable_bytes(&first);
        let b = stable_bytes(&run_env(args, &[("MPR_THREADS", "4")]));
        let c = stable_bytes(&run(args));
        check(a == b && b == c, || {
            format!("{name}: reports differ between runs")
        })?;
    }
    Ok(format!(
        "{} commands byte-identical across reruns and thread counts",
        commands.len()
    ))
}

fn main() {
    let checks: [(&str, Check, Duration); 10] = [
        (
            "oracle equivalence (tree closed form vs brute force)",
            oracle_equivalence,
            Duration::from_secs(60),
        ),
        (
            "linear closed form",
            linear_closed_form,
            Duration::from_secs(30),
        ),
        (
            "monotonicity in depth and attributes",
            monotonicity,
            Duration::from_secs(30),
        ),
        (
            "generalisation bound validity",
            bound_validity,
            Duration::from_secs(300),
        ),
        (
            "empirical-vs-true gap shape",
            gap_shape,
            Duration::from_secs(180),
        ),
        (
            "bootstrap std heatmap shape",
            heatmap_shape,
            Duration::from_secs(120),
        ),
        (
            "optimizer skewed-to-uniform scenario",
            optimizer_scenario,
            Duration::from_secs(60),
        ),
        (
            "gradient correctness",
            gradient_correctness,
            Duration::from_secs(10),
        ),
        (
            "Welch test calibration",
            welch_calibration,
            Duration::from_secs(60),
        ),
        ("CLI determinism", cli_determinism, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    for (name, f, budget) in checks {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = started.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= budget {
                Ok(detail)
            } else {
                Err(format!("took {elapsed:.1?}, budget {budget:?}"))
            }
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{elapsed:.2?}]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{elapsed:.2?}]");
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
