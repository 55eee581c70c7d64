use hyfuzz::analysis::TargetAnalysis;
use hyfuzz::explorer::{run_explorer, ExplorerBudget, SolutionKind};
use hyfuzz::fuzzer::{FuzzerConfig, FuzzerState, SeedMetadata};
use hyfuzz::program::{BasicBlock, FunctionDef, Terminator};
use hyfuzz::{execute, BlockId, BytePredicate, ProgramModel, Relation, TargetPoint};
use proptest::prelude::*;

const RELATIONS: [Relation; 6] = [Relation::Eq, Relation::Ne, Relation::Lt, Relation::Le, Relation::Gt, Relation::Ge];

/// Raw material for an acyclic single-function program: per block a
/// predicate (first offset, width, relation, constant) and two forward
/// jump distances.
type BlockSpec = (usize, usize, usize, u64, usize, usize);

fn block_spec() -> impl Strategy<Value = BlockSpec> {
    (0usize..6, 1usize..=3, 0usize..6, any::<u64>(), 1usize..4, 1usize..4)
}

fn build_dag(specs: &[BlockSpec]) -> ProgramModel {
    let n = specs.len();
    let mut blocks: Vec<BasicBlock> = specs
        .iter()
        .enumerate()
        .map(|(i, &(first, width, rel, constant, a, b))| {
            let offsets: Vec<usize> = (first..first + width).collect();
            let max = (1u64 << (8 * width)) - 1;
            let cond = BytePredicate::new(offsets, RELATIONS[rel], constant & max).unwrap();
            BasicBlock {
                id: BlockId(i as u32),
                label: format!("dag.c:{i}"),
                terminator: Terminator::Branch {
                    cond,
                    then_block: BlockId((i + a).min(n) as u32),
                    else_block: BlockId((i + b).min(n) as u32),
                },
            }
        })
        .collect();
    blocks.push(BasicBlock {
        id: BlockId(n as u32),
        label: "dag.c:end".into(),
        terminator: Terminator::Halt,
    });
    let f = FunctionDef {
        name: "main".into(),
        entry_block: BlockId(0),
        blocks,
    };
    ProgramModel::new(vec![f], "main", vec![TargetPoint::new("end", "dag.c:end")]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn full_solutions_keep_prefix_and_flip_branch(
        specs in prop::collection::vec(block_spec(), 1..10),
        seed in prop::collection::vec(any::<u8>(), 0..10),
    ) {
        let program = build_dag(&specs);
        let dir = tempfile::tempdir().unwrap();
        let report = run_explorer("s", &seed, &program, dir.path(), &ExplorerBudget::default(), 1000).unwrap();
        let base = execute(&program, &seed, 1000, true);
        for g in report.generated.iter().filter(|g| g.kind == SolutionKind::Full) {
            let bytes = std::fs::read(&g.path).unwrap();
            let replay = execute(&program, &bytes, 1000, true);
            let k = g.inverted_index;
            prop_assert_eq!(&replay.constraints[..k], &base.constraints[..k]);
            prop_assert_eq!(replay.constraints[k].block_id, base.constraints[k].block_id);
            prop_assert_ne!(replay.constraints[k].taken, base.constraints[k].taken);
        }
        prop_assert_eq!(report.attempted, base.constraints.len());
        prop_assert_eq!(report.generated.len() + report.unsat + report.budget_exceeded, report.attempted);
    }

    #[test]
    fn trailing_zeros_do_not_change_execution(
        specs in prop::collection::vec(block_spec(), 1..10),
        input in prop::collection::vec(any::<u8>(), 0..10),
        pad in 0usize..8,
    ) {
        let program = build_dag(&specs);
        let mut padded = input.clone();
        padded.resize(input.len() + pad, 0);
        let a = execute(&program, &input, 1000, true);
        let b = execute(&program, &padded, 1000, true);
        prop_assert_eq!(a, b.clone());
        prop_assert_eq!(b, execute(&program, &padded, 1000, true));
    }

    #[test]
    fn metadata_json_round_trips(
        ets in any::<bool>(),
        map in any::<bool>(),
        trace in prop::collection::vec(any::<u32>(), 0..20),
        targets in prop::collection::vec("\\PC{0,12}", 0..4),
        crash in any::<bool>(),
        timeout in any::<bool>(),
    ) {
        let meta = SeedMetadata {
            is_interesting_ets: ets,
            is_interesting_map: map,
            ets_trace: trace.into_iter().map(BlockId).collect(),
            reached_targets: targets,
            is_crash: crash,
            is_timeout: timeout,
        };
        let text = meta.to_json();
        let parsed = SeedMetadata::from_json(&text).unwrap();
        prop_assert_eq!(&parsed, &meta);
        prop_assert_eq!(parsed.to_json(), text);
    }
}

fn corpus_after(program: &ProgramModel, seed: u64, rounds: usize) -> Vec<Vec<u8>> {
    let dir = tempfile::tempdir().unwrap();
    let mut config = FuzzerConfig::new(0, dir.path().join("corpus"), dir.path().join("objectives"));
    config.rng_seed = seed;
    let analysis = TargetAnalysis::run(program);
    let mut state = FuzzerState::new(config, &analysis).unwrap();
    for _ in 0..rounds {
        state.fuzz_iteration(program).unwrap();
    }
    state.corpus.iter().map(|e| e.seed.bytes.clone()).collect()
}

#[test]
fn fuzzer_is_deterministic_for_a_seed() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../programs/nested.toml")).unwrap();
    let program = hyfuzz::parse_program(&text).unwrap();
    let a = corpus_after(&program, 11, 200);
    assert_eq!(a, corpus_after(&program, 11, 200));
    assert!(a.len() > 1);
}
