//! Acceptance gate. Prints one `criterion N: PASS|FAIL` line per criterion and
//! exits nonzero if any fails. Criteria can be selected by number:
//! `cargo test --test acceptance -- 2 7`.

mod common;

use std::cell::OnceCell;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::finite_diff::{mpvin_errors, vin_errors};
use common::labels::{check_graph_labels, check_grid_labels};
use common::rank::compare_ranks;
use common::{bellman_symmetry_residuals, quarter_turn_graph};
use mpvin::equivariant_nn::{LiftLayer, ParamStore};
use mpvin::evaluation::{evaluate_model, evaluate_random, success_rate, RolloutConfig};
use mpvin::planner::{
    equivariance_audit, max_violation, GridVin, MpVin, PlannerConfig, PolicyModel, Variant, VinConfig,
};
use mpvin::symmetry::{check_representation, rep_regular, rep_restrict, rep_standard, rep_trivial, GroupSpec};
use mpvin::training::{train_with, TrainConfig};
use mpvin::worlds::{generate_dataset, generate_graph_world, Dataset, GraphWorldParams, Split, WorldParams};

const EPOCHS: usize = 30;
const SEEDS: [u64; 3] = [0, 1, 2];

type Verdict = Result<String, String>;

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn train_model<M: PolicyModel>(label: &str, model: &mut M, train: &Dataset, val: &Dataset, seed: u64) {
    let cfg =
        TrainConfig { rollout: RolloutConfig { seed, ..RolloutConfig::default() }, ..TrainConfig::new(EPOCHS, seed) };
    let t = Instant::now();
    let mut last = 0;
    let out = train_with(model, train, val, &cfg, |m| last = m.epoch).unwrap();
    let best = out.log.epochs.iter().find(|m| m.epoch == out.checkpoint.epoch);
    eprintln!(
        "  trained {label} seed {seed}: {last} epochs, best epoch {} (val success {:.1}%), {:.0}s",
        out.checkpoint.epoch,
        best.and_then(|m| m.val_success).unwrap_or(f64::NAN),
        t.elapsed().as_secs_f64()
    );
}

fn train_graph(variant: Variant, group: Option<GroupSpec>, train: &Dataset, val: &Dataset) -> Vec<(u64, MpVin)> {
    SEEDS
        .iter()
        .map(|&seed| {
            let mut model = MpVin::new(PlannerConfig::graph(variant, group), seed).unwrap();
            train_model(&format!("{variant}@{}", train.len()), &mut model, train, val, seed);
            (seed, model)
        })
        .collect()
}

fn borrowed(models: &[(u64, MpVin)]) -> Vec<(u64, &MpVin)> {
    models.iter().map(|(s, m)| (*s, m)).collect()
}

fn mean_rate(models: &[(u64, MpVin)], test: &Dataset, train_size: usize) -> f64 {
    success_rate(&borrowed(models), test, train_size, &RolloutConfig::default()).unwrap().mean
}

fn graph_world(nodes: usize) -> WorldParams {
    WorldParams::Graph(GraphWorldParams::with_nodes(nodes))
}

/// Models trained on the 128-node split.
struct SmallGraphs {
    test: Dataset,
    r2_group: Vec<(u64, MpVin)>,
    no_sym: Vec<(u64, MpVin)>,
    group_only: Vec<(u64, MpVin)>,
}

/// Models trained on 225-node graphs, with test sets at 225 and 450 nodes.
struct LargeGraphs {
    test: Dataset,
    test_double: Dataset,
    r2_group_100: Vec<(u64, MpVin)>,
    r2_group_512: Vec<(u64, MpVin)>,
    no_sym_512: Vec<(u64, MpVin)>,
}

#[derive(Default)]
struct Shared {
    small: OnceCell<SmallGraphs>,
    large: OnceCell<LargeGraphs>,
}

impl Shared {
    fn small(&self) -> &SmallGraphs {
        self.small.get_or_init(|| {
            let world = graph_world(128);
            let train = generate_dataset(world, Split::Train, 1000, 7).unwrap();
            let val = generate_dataset(world, Split::Val, 200, 7).unwrap();
            let d8 = Some(GroupSpec::dihedral(8));
            SmallGraphs {
                test: generate_dataset(world, Split::Test, 200, 7).unwrap(),
                r2_group: train_graph(Variant::R2Group, d8, &train, &val),
                no_sym: train_graph(Variant::NoSym, None, &train, &val),
                group_only: train_graph(Variant::GroupOnly, d8, &train, &val),
            }
        })
    }

    fn large(&self) -> &LargeGraphs {
        self.large.get_or_init(|| {
            let world = graph_world(225);
            let train = generate_dataset(world, Split::Train, 512, 9).unwrap();
            let first_100 = Dataset { samples: train.samples[..100].to_vec(), ..train.clone() };
            let val = generate_dataset(world, Split::Val, 100, 9).unwrap();
            let d8 = Some(GroupSpec::dihedral(8));
            LargeGraphs {
                test: generate_dataset(world, Split::Test, 200, 9).unwrap(),
                test_double: generate_dataset(graph_world(450), Split::Test, 200, 9).unwrap(),
                r2_group_100: train_graph(Variant::R2Group, d8, &first_100, &val),
                r2_group_512: train_graph(Variant::R2Group, d8, &train, &val),
                no_sym_512: train_graph(Variant::NoSym, None, &train, &val),
            }
        })
    }
}

fn representation_algebra(_: &Shared) -> Verdict {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let groups = (1..=16).map(GroupSpec::cyclic).chain((1..=8).map(GroupSpec::dihedral));
    for g in groups {
        for rep in [rep_trivial(g), rep_standard(g), rep_regular(g)] {
            worst = worst.max(check_representation(&rep));
        }
    }
    let pairs = compare_ranks()?;
    let secs = t.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-10 && pairs >= 20 && secs < 60.0,
        format!("homomorphism violation {worst:.1e}, {pairs} rank pairs match the SVD oracle, {secs:.1}s"),
    )
}

fn layer_equivariance(shared: &Shared) -> Verdict {
    let d8 = GroupSpec::dihedral(8);
    let untrained = MpVin::new(PlannerConfig::graph(Variant::R2Group, Some(d8)), 0).unwrap();
    let trained = &shared.small().r2_group[0].1;
    let graphs: Vec<_> =
        (0..20).map(|s| generate_graph_world(&GraphWorldParams::with_nodes(128), 1000 + s).unwrap()).collect();
    let t = Instant::now();
    let (mut single, mut double) = (0.0f64, 0.0f64);
    for model in [&untrained, trained] {
        let store64 = model.params().cast::<f64>();
        for g in &graphs {
            single = single.max(max_violation(&equivariance_audit(model, model.params(), g, d8).unwrap()));
            double = double.max(max_violation(&equivariance_audit(model, &store64, g, d8).unwrap()));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    verdict(
        single <= 1e-5 && double <= 1e-10 && secs < 300.0,
        format!("max violation {single:.2e} single, {double:.2e} double over 16 elements and 20 graphs, {secs:.0}s"),
    )
}

/// Regular representation of `g` restricted to rotations by `h·|rot|/k`, written
/// directly as a shift of the rotation index inside each coset.
fn shift_oracle(g: GroupSpec, k: usize, h: usize) -> Array2<f64> {
    let n = g.rotation_order();
    let shift = h * n / k;
    let mut m = Array2::zeros((g.order(), g.order()));
    for j in 0..g.order() {
        let (rot, coset) = (j % n, j / n);
        m[[(rot + shift) % n + coset * n, j]] = 1.0;
    }
    m
}

fn lift_layer(_: &Shared) -> Verdict {
    let mut worst = 0.0f64;
    let mut mismatched = 0;
    for g in [GroupSpec::cyclic(8), GroupSpec::dihedral(8)] {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut store = ParamStore::<f64>::new();
            let lift = LiftLayer::new(&mut store, "lift", 4, 3, g, 2, &mut rng).unwrap();
            let images = Array2::from_shape_fn((4, 3), |_| rng.gen_range(-1.0..1.0));
            worst = worst.max(lift.audit(&store, &images).unwrap().max_subgroup_violation());
            let restricted = rep_restrict(&rep_regular(g), GroupSpec::cyclic(4), lift.embedding()).unwrap();
            for h in 0..4 {
                let oracle = shift_oracle(g, 4, h);
                if lift.block_rep().matrix(h) != oracle || restricted.matrix(h) != oracle {
                    mismatched += 1;
                }
            }
        }
    }
    verdict(
        worst <= 1e-6 && mismatched == 0,
        format!("C4 violation {worst:.1e} for C8 and D8, {mismatched} restriction mismatches"),
    )
}

fn bellman_symmetry(_: &Shared) -> Verdict {
    let (mut inv, mut step, mut states) = (0.0f64, 0.0f64, 0);
    for seed in 0..20 {
        let (graph, sigma) = quarter_turn_graph(3 + (seed as usize % 13), seed);
        states = states.max(graph.n_nodes());
        for gamma in [1.0, 0.9] {
            let (a, b) = bellman_symmetry_residuals(&graph, &sigma, gamma, seed);
            inv = inv.max(a);
            step = step.max(b);
        }
    }
    verdict(
        inv <= 1e-10 && step <= 1e-10 && states <= 64,
        format!("values {inv:.1e}, operator {step:.1e} on up to {states} states"),
    )
}

fn expert_labels(_: &Shared) -> Verdict {
    for seed in 0..100 {
        check_grid_labels(seed)?;
        check_graph_labels(seed)?;
    }
    Ok("100 grids match breadth-first search, 100 graphs match Bellman-Ford".into())
}

fn gradients(_: &Shared) -> Verdict {
    let mut worst = ("", 0.0f64);
    let cases = [
        ("r2_group", mpvin_errors(Variant::R2Group, Some(GroupSpec::dihedral(2)))),
        ("no_sym", mpvin_errors(Variant::NoSym, None)),
        ("vin", vin_errors()),
    ];
    for (label, errs) in &cases {
        for (_, e) in errs {
            if *e > worst.1 {
                worst = (label, *e);
            }
        }
    }
    verdict(worst.1 <= 1e-3, format!("worst relative error {:.1e} ({})", worst.1, worst.0))
}

fn small_graph_ordering(shared: &Shared) -> Verdict {
    let s = shared.small();
    let r2 = mean_rate(&s.r2_group, &s.test, 1000);
    let ns = mean_rate(&s.no_sym, &s.test, 1000);
    let go = mean_rate(&s.group_only, &s.test, 1000);
    verdict(r2 >= ns + 5.0 && r2 > go, format!("r2_group {r2:.1}%, no_sym {ns:.1}%, group_only {go:.1}%"))
}

fn grid_smoke(_: &Shared) -> Verdict {
    let world = WorldParams::Grid { size: 15 };
    let train = generate_dataset(world, Split::Train, 2000, 8).unwrap();
    let val = generate_dataset(world, Split::Val, 200, 8).unwrap();
    let test = generate_dataset(world, Split::Test, 200, 8).unwrap();
    let cfg = RolloutConfig::default();
    let mut r2 = MpVin::new(PlannerConfig::grid(Variant::R2Group, Some(GroupSpec::dihedral(4))), 0).unwrap();
    train_model("r2_group grid", &mut r2, &train, &val, 0);
    let mut vin = GridVin::new(VinConfig::default(), 0).unwrap();
    train_model("vin", &mut vin, &train, &val, 0);
    let r2_rate = evaluate_model(&r2, &test, &cfg).unwrap().rate();
    let vin_rate = evaluate_model(&vin, &test, &cfg).unwrap().rate();
    let random = evaluate_random(&test, &cfg).unwrap().rate();
    verdict(
        r2_rate >= 70.0 && vin_rate > random,
        format!("r2_group {r2_rate:.1}%, vin {vin_rate:.1}%, random {random:.1}%"),
    )
}

fn data_efficiency(shared: &Shared) -> Verdict {
    let l = shared.large();
    let r2 = mean_rate(&l.r2_group_100, &l.test, 100);
    let ns = mean_rate(&l.no_sym_512, &l.test, 512);
    verdict(r2 >= ns, format!("r2_group@100 {r2:.1}%, no_sym@512 {ns:.1}%"))
}

fn size_generalization(shared: &Shared) -> Verdict {
    let l = shared.large();
    let drop = |models: &[(u64, MpVin)]| {
        let at = mean_rate(models, &l.test, 512);
        let double = mean_rate(models, &l.test_double, 512);
        (at, double, at - double)
    };
    let (r2_at, r2_double, r2_drop) = drop(&l.r2_group_512);
    let (ns_at, ns_double, ns_drop) = drop(&l.no_sym_512);
    verdict(
        r2_drop <= 0.5 * ns_drop,
        format!(
            "r2_group {r2_at:.1}% -> {r2_double:.1}% (drop {r2_drop:.1}), no_sym {ns_at:.1}% -> {ns_double:.1}% (drop {ns_drop:.1})"
        ),
    )
}

fn main() {
    let criteria: [(usize, &str, fn(&Shared) -> Verdict); 10] = [
        (1, "representation algebra", representation_algebra),
        (2, "layer equivariance", layer_equivariance),
        (3, "lift layer", lift_layer),
        (4, "Bellman operator symmetry", bellman_symmetry),
        (5, "expert labels", expert_labels),
        (6, "gradient correctness", gradients),
        (7, "128-node graph ordering", small_graph_ordering),
        (8, "grid world smoke", grid_smoke),
        (9, "data efficiency", data_efficiency),
        (10, "size generalization", size_generalization),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let shared = Shared::default();
    let mut failed = 0;
    for (n, name, run) in criteria {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(|| run(&shared)))
            .unwrap_or_else(|e| Err(format!("panicked: {}", panic_message(&e))));
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {n}: PASS {name}: {detail} [{secs:.0}s]"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n}: FAIL {name}: {detail} [{secs:.0}s]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn panic_message(e: &Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
}
