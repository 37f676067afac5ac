//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p cipvem --test acceptance`. The process fails if
//! any criterion fails, except those marked as known gaps, which are still
//! reported as FAIL.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cipvem::experiments::{
    build_level_meshes, cip_ab_comparison, convergence_on_meshes, manufactured_problem, patch_problem,
    run_problem, ConvergenceTable, MeshFamily, MeshSpec, Preset,
};
use cipvem::forms::{oswald_constant, oswald_interpolate, AdvectionField};
use cipvem::mesh::PolygonalMesh;
use cipvem::system::{assemble_blocks, infsup_probe, AssemblyConfig};
use cipvem::vemspace::VemSpace;
use cipvem::Point;

const LEVELS: [usize; 4] = [64, 256, 1024, 4096];
const SEED: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

struct Criterion {
    name: &'static str,
    budget: Option<Duration>,
    known_gap: bool,
    check: fn(&Shared) -> Outcome,
}

/// Meshes reused by several criteria.
struct Shared {
    voro_levels: Vec<PolygonalMesh>,
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

fn projector_suite(_: &Shared) -> Outcome {
    let meshes = [
        MeshFamily::Voronoi.build(256, SEED).unwrap(),
        MeshFamily::Quad.build(256, SEED).unwrap(),
    ];
    let (mut repro, mut gbd, mut enh) = (0.0f64, 0.0f64, 0.0f64);
    for mesh in &meshes {
        for k in 1..=3 {
            let space = VemSpace::new(mesh.clone(), k).unwrap();
            for (el, p) in space.elements().iter().zip(space.projectors()) {
                let nk = el.basis.len();
                let eye = DMatrix::<f64>::identity(nk, nk);
                repro = repro
                    .max(max_abs(&(&p.pi_nabla * &p.d - &eye)))
                    .max(max_abs(&(&p.pi_zero * &p.d - &eye)));
                gbd = gbd.max(max_abs(&(&p.g - &p.b * &p.d)) / max_abs(&p.g).max(1.0));
                // moments of degree k-1 and k of Π⁰v must match those of Π∇v
                let lo = if k >= 2 { k * (k - 1) / 2 } else { 0 };
                let diff = &p.mass * (&p.pi_zero - &p.pi_nabla);
                let scale = max_abs(&(&p.mass * &p.pi_nabla)).max(1e-300);
                enh = enh.max(max_abs(&diff.rows(lo, nk - lo).into_owned()) / scale);
            }
        }
    }
    let pass = repro <= 1e-11 && gbd <= 1e-11 && enh <= 1e-11;
    Outcome::new(
        pass,
        format!("reproduction {repro:.1e}, G - BD {gbd:.1e}, enhancement {enh:.1e}"),
    )
}

fn patch_test(_: &Shared) -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for family in [MeshFamily::Voronoi, MeshFamily::Quad] {
        let mesh = MeshSpec {
            family,
            cells: 64,
            seed: 3,
        };
        for k in 1..=3u32 {
            let mut solutions: Vec<Vec<(u32, u32, f64)>> = (0..=k).map(|a| vec![(a, k - a, 1.0)]).collect();
            // x·y lies in the discrete space only from k = 2 on
            if k >= 2 {
                solutions.push(vec![(1, 1, 1.0)]);
            }
            for terms in solutions {
                for cip in [true, false] {
                    let run = run_problem(&patch_problem(terms.clone(), k as usize, cip, mesh)).unwrap();
                    worst = worst.max(run.errors.e_h1).max(run.errors.e_l2);
                    cases += 1;
                }
            }
        }
    }
    Outcome::new(worst <= 1e-8, format!("{cases} cases, worst error {worst:.1e}"))
}

fn diffusive_convergence(shared: &Shared) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for k in 1..=3 {
        let table = |cip| {
            let p = manufactured_problem(
                Preset::DiffusionDominated,
                k,
                cip,
                MeshSpec {
                    family: MeshFamily::Voronoi,
                    cells: LEVELS[0],
                    seed: SEED,
                },
            );
            convergence_on_meshes(&p, &shared.voro_levels).unwrap()
        };
        let (on, off) = (table(true), table(false));
        let rates = |t: &ConvergenceTable| (t.last_rate_h1().unwrap(), t.last_rate_l2().unwrap());
        let (h1_on, l2_on) = rates(&on);
        let (h1_off, l2_off) = rates(&off);
        let kf = k as f64;
        let ok = h1_on.min(h1_off) >= kf - 0.15
            && l2_on.min(l2_off) >= kf + 0.85
            && (h1_on - h1_off).abs() <= 0.1
            && (l2_on - l2_off).abs() <= 0.1;
        pass &= ok;
        parts.push(format!(
            "k={k} H1 {h1_on:.3}/{h1_off:.3} L2 {l2_on:.3}/{l2_off:.3}"
        ));
    }
    Outcome::new(pass, format!("last-pair slopes on/off: {}", parts.join("; ")))
}

fn advection_spec() -> MeshSpec {
    MeshSpec {
        family: MeshFamily::Voronoi,
        cells: 256,
        seed: SEED,
    }
}

fn advection_stabilized_max(_: &Shared) -> Outcome {
    let p = manufactured_problem(Preset::AdvectionConst, 1, true, advection_spec());
    let max = run_problem(&p).unwrap().max_abs_dof();
    Outcome::new(max <= 1.5, format!("max |DoF| with CIP {max:.4}"))
}

fn advection_unstabilized_max(_: &Shared) -> Outcome {
    let p = manufactured_problem(Preset::AdvectionConst, 1, true, advection_spec());
    let c = cip_ab_comparison(&p).unwrap();
    let (off, ratio) = (c.max_off(), c.ratio());
    Outcome::new(
        off >= 10.0,
        format!("max |DoF| without CIP {off:.4}, ratio off/on {ratio:.3}"),
    )
}

fn advection_tables(shared: &Shared, cip: bool) -> ConvergenceTable {
    let p = manufactured_problem(
        Preset::AdvectionConst,
        1,
        cip,
        MeshSpec {
            family: MeshFamily::Voronoi,
            cells: LEVELS[0],
            seed: SEED,
        },
    );
    convergence_on_meshes(&p, &shared.voro_levels).unwrap()
}

fn advection_stabilized_rate(shared: &Shared) -> Outcome {
    let t = advection_tables(shared, true);
    let slope = t.fitted_rate_l2();
    Outcome::new(
        slope >= 1.3,
        format!("fitted L2 slope with CIP {slope:.3}, errors {}", fmt_list(&t.e_l2())),
    )
}

fn advection_unstabilized_rate(shared: &Shared) -> Outcome {
    let t = advection_tables(shared, false);
    let rates: Vec<f64> = t.rows.iter().filter_map(|r| r.rate_l2).collect();
    let pass = rates.iter().any(|&r| r < 0.5);
    Outcome::new(pass, format!("L2 pair slopes without CIP {rates:.3?}"))
}

fn sigma_robustness(_: &Shared) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for family in [MeshFamily::Voronoi, MeshFamily::Quad] {
        let meshes = build_level_meshes(family, &LEVELS, SEED).unwrap();
        let run = |preset| {
            let p = manufactured_problem(
                preset,
                1,
                true,
                MeshSpec {
                    family,
                    cells: LEVELS[0],
                    seed: SEED,
                },
            );
            convergence_on_meshes(&p, &meshes).unwrap()
        };
        let (t0, t1) = (run(Preset::AdvectionVarSigma0), run(Preset::AdvectionVarSigma1));
        let converges = |t: &ConvergenceTable| t.rows.iter().filter_map(|r| r.rate_l2).all(|r| r > 0.0);
        let (l0, l1) = (t0.fitted_rate_l2(), t1.fitted_rate_l2());
        let (g0, g1) = (t0.fitted_rate_h1(), t1.fitted_rate_h1());
        let ok = converges(&t0) && converges(&t1) && (l0 - l1).abs() <= 0.2 && (g0 - g1).abs() <= 0.2;
        pass &= ok;
        parts.push(format!(
            "{family}: L2 {l0:.3}/{l1:.3} H1 {g0:.3}/{g1:.3}"
        ));
    }
    Outcome::new(pass, format!("fitted slopes sigma=0/1: {}", parts.join("; ")))
}

fn oswald_estimate(_: &Shared) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut identity = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for k in 1..=3 {
        let mut constants = Vec::new();
        for (i, side) in [4usize, 8, 16, 32].into_iter().enumerate() {
            let mesh = MeshFamily::Quad.build(side * side, SEED + i as u64).unwrap();
            let space = VemSpace::new(mesh, k).unwrap();
            let random: Vec<Vec<f64>> = space
                .elements()
                .iter()
                .map(|el| (0..el.basis.len()).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            constants.push(oswald_constant(&space, &random).unwrap());

            let f = |p: &Point| 0.3 - p.x + 2.0 * p.x * p.y.powi(k as i32 - 1) + p.y.powi(k as i32);
            let exact = space.interpolate(f);
            let conforming: Vec<Vec<f64>> = (0..space.mesh().n_cells())
                .map(|c| (&space.projectors()[c].pi_zero * space.local_values(c, &exact)).as_slice().to_vec())
                .collect();
            let pi = oswald_interpolate(&space, &conforming).unwrap();
            identity = identity.max((pi - exact).amax());
        }
        let max = constants.iter().cloned().fold(f64::MIN, f64::max);
        let min = constants.iter().cloned().fold(f64::MAX, f64::min);
        pass &= min > 0.0 && max / min < 3.0;
        parts.push(format!("k={k} {constants:.3?}"));
    }
    pass &= identity <= 1e-12;
    Outcome::new(
        pass,
        format!("constants {}; conforming identity {identity:.1e}", parts.join("; ")),
    )
}

fn structural_invariants(_: &Shared) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut skew, mut min_jump, mut min_react) = (0.0f64, f64::MAX, f64::MAX);
    for (family, beta) in [
        (MeshFamily::Voronoi, AdvectionField::constant(1.0, 0.5)),
        (MeshFamily::Quad, AdvectionField::trigonometric()),
    ] {
        let space = VemSpace::new(family.build(64, SEED).unwrap(), 2).unwrap();
        let config = AssemblyConfig {
            epsilon: 1e-3,
            sigma: 1.0,
            beta,
            delta: 0.1,
            cip_on: true,
        };
        let blocks = assemble_blocks(&space, &config).unwrap();
        let n = space.n_dofs();
        for _ in 0..100 {
            let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let scale = v.norm_squared() * blocks.skew.frobenius_norm();
            skew = skew.max(blocks.skew.quadratic_form(&v, &v).abs() / scale);
            let vv = v.norm_squared();
            min_jump = min_jump.min(blocks.cip.quadratic_form(&v, &v) / (vv * blocks.cip.frobenius_norm()));
            min_react = min_react.min(blocks.reaction.quadratic_form(&v, &v) / (vv * blocks.reaction.frobenius_norm()));
        }
    }
    let mut div = 0.0f64;
    for beta in [AdvectionField::constant(1.0, 0.5), AdvectionField::trigonometric()] {
        for _ in 0..1000 {
            let p = Point::new(rng.random(), rng.random());
            div = div.max(beta.divergence(&p).abs());
        }
    }
    let pass = skew <= 1e-13 && min_jump >= -1e-13 && min_react >= -1e-13 && div <= 1e-10;
    Outcome::new(
        pass,
        format!(
            "skew quadratic form {skew:.1e}, min J_h {min_jump:.1e}, min c_h {min_react:.1e}, max |div beta| {div:.1e}"
        ),
    )
}

fn infsup(_: &Shared) -> Outcome {
    let meshes = build_level_meshes(MeshFamily::Voronoi, &[16, 64, 256], SEED).unwrap();
    let config = AssemblyConfig {
        epsilon: 1e-9,
        sigma: 1.0,
        beta: AdvectionField::constant(1.0, 0.5),
        delta: 0.1,
        cip_on: true,
    };
    let c: Vec<f64> = infsup_probe(&meshes, 1, &config)
        .unwrap()
        .iter()
        .map(|e| e.constant)
        .collect();
    let max = c.iter().cloned().fold(f64::MIN, f64::max);
    let min = c.iter().cloned().fold(f64::MAX, f64::min);
    Outcome::new(min > 0.0 && max / min <= 2.0, format!("constants {c:.4?}"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let shared = Shared {
        voro_levels: build_level_meshes(MeshFamily::Voronoi, &LEVELS, SEED).unwrap(),
    };
    println!("acceptance: shared meshes built in {:.1?}", start.elapsed());
    let minutes = |m: u64| Some(Duration::from_secs(60 * m));
    let criteria = [
        Criterion { name: "projector suite", budget: Some(Duration::from_secs(30)), known_gap: false, check: projector_suite },
        Criterion { name: "patch test", budget: Some(Duration::from_secs(60)), known_gap: false, check: patch_test },
        Criterion { name: "diffusive convergence", budget: minutes(10), known_gap: false, check: diffusive_convergence },
        Criterion { name: "advection: stabilized max", budget: None, known_gap: false, check: advection_stabilized_max },
        Criterion { name: "advection: unstabilized max", budget: None, known_gap: true, check: advection_unstabilized_max },
        Criterion { name: "advection: stabilized L2 slope", budget: minutes(10), known_gap: false, check: advection_stabilized_rate },
        Criterion { name: "advection: unstabilized stagnation", budget: minutes(10), known_gap: false, check: advection_unstabilized_rate },
        Criterion { name: "sigma robustness", budget: None, known_gap: false, check: sigma_robustness },
        Criterion { name: "oswald estimate", budget: None, known_gap: false, check: oswald_estimate },
        Criterion { name: "structural invariants", budget: None, known_gap: false, check: structural_invariants },
        Criterion { name: "inf-sup probe", budget: None, known_gap: false, check: infsup },
    ];
    let (mut failed, mut gaps) = (0, 0);
    for c in &criteria {
        let t = Instant::now();
        let mut outcome = (c.check)(&shared);
        let elapsed = t.elapsed();
        if let Some(budget) = c.budget {
            if elapsed > budget {
                outcome.pass = false;
                outcome.detail += &format!(" (over budget {budget:?})");
            }
        }
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        let note = if !outcome.pass && c.known_gap { " [known gap]" } else { "" };
        println!("{status} {}{note}: {} [{elapsed:.1?}]", c.name, outcome.detail);
        if !outcome.pass {
            if c.known_gap {
                gaps += 1;
            } else {
                failed += 1;
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed, {gaps} known gaps, total {:.1?}",
        criteria.len() - failed - gaps,
        start.elapsed()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn fmt_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", items.join(", "))
}
