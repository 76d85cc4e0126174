mod common;

use common::{instances, random_abox, random_program};
use omq::bench::Method;
use omq::eval::eval_seminaive;
use omq::ndl::{infer_weight_function, lift_linear, to_skinny, Program};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `d(Π, G) + ⌈log₂(ν(G) + k_max)⌉`.
fn skinny_bound(program: &Program) -> usize {
    let nu = infer_weight_function(program).unwrap();
    let k_max = program.clauses.iter().map(|c| c.body.len()).max().unwrap_or(0) as u64;
    let total = nu.get(&program.goal).copied().unwrap_or(0) + k_max;
    program.depth().unwrap() + (total as f64).log2().ceil() as usize
}

pub fn check_skinny(program: &Program, abox: &omq::dl::ABox) -> Result<(), String> {
    let skinny = to_skinny(program).map_err(|e| e.to_string())?;
    let report = skinny.validate().map_err(|e| e.to_string())?;
    if !report.skinny {
        return Err(format!("not skinny:\n{skinny}"));
    }
    if report.depth > skinny_bound(program) {
        return Err(format!("depth {} over bound {}:\n{program}", report.depth, skinny_bound(program)));
    }
    let before = eval_seminaive(program, abox).map_err(|e| e.to_string())?;
    let after = eval_seminaive(&skinny, abox).map_err(|e| e.to_string())?;
    if before != after {
        return Err(format!("answers changed:\n{program}\n{abox}"));
    }
    Ok(())
}

#[test]
fn skinny_random_programs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let program = random_program(&mut rng);
        let abox = random_abox(&mut rng, 4);
        check_skinny(&program, &abox).unwrap();
    }
}

#[test]
fn skinny_rewritings() {
    for method in [Method::Td, Method::Tw] {
        for inst in instances(method, 40, 21) {
            let program = method.rewrite(&inst.tbox, &inst.cq).unwrap();
            let h = omq::dl::h_complete(&inst.tbox, &inst.abox);
            check_skinny(&program, &h).unwrap();
        }
    }
}

#[test]
fn linear_lift_width() {
    for inst in instances(Method::Slice, 100, 22) {
        let program = Method::Slice.rewrite(&inst.tbox, &inst.cq).unwrap();
        let lifted = lift_linear(&program, &inst.tbox).unwrap();
        let report = lifted.validate().unwrap();
        assert!(report.linear);
        assert!(lifted.width() <= program.width() + 1, "{}", inst.cq);
    }
}
