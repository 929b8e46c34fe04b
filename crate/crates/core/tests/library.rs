use geoclidean::concepts::{builtin_sources, builtin_tasks, Label};
use geoclidean::dsl::parse;
use geoclidean::realize::{realize_seeded, satisfies, RealizeConfig};

#[test]
fn every_program_realizes_for_100_seeds() {
    let mut worst = Vec::new();
    for (stem, text) in builtin_sources() {
        let program = parse(text).unwrap();
        let mut total = 0;
        let mut max = 0;
        for seed in 0..100 {
            let r = realize_seeded(&program, &RealizeConfig::with_seed(seed))
                .unwrap_or_else(|e| panic!("{stem} seed {seed}: {e}"));
            assert!(satisfies(&program, &r).unwrap(), "{stem} seed {seed}");
            total += r.restarts;
            max = max.max(r.restarts);
        }
        worst.push((stem, total, max));
    }
    worst.sort_by_key(|w| std::cmp::Reverse(w.1));
    for (stem, total, max) in worst.iter().take(10) {
        println!("{stem}: {total} restarts over 100 seeds (max {max})");
    }
}

#[test]
fn negatives_rarely_satisfy_target() {
    for task in builtin_tasks() {
        for label in [Label::CloseNeg, Label::FarNeg] {
            let mut hits = 0;
            for seed in 0..100 {
                let r =
                    realize_seeded(task.program(label), &RealizeConfig::with_seed(seed)).unwrap();
                if satisfies(&task.target, &r).unwrap() {
                    hits += 1;
                }
            }
            assert!(
                hits < 5,
                "{} {label}: {hits}/100 satisfy the target",
                task.concept_id
            );
        }
    }
}
