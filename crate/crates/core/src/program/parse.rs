//! TOML program-model documents. The format is described in
//! `docs/program-format.md`.

use serde::Deserialize;

use super::{BasicBlock, BlockId, BytePredicate, FunctionDef, ProgramModel, Relation, TargetPoint, Terminator};
use crate::error::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProgram {
    entry_function: String,
    #[serde(default, rename = "function")]
    functions: Vec<RawFunction>,
    #[serde(default, rename = "target")]
    targets: Vec<TargetPoint>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFunction {
    name: String,
    entry: u32,
    #[serde(default, rename = "block")]
    blocks: Vec<RawBlock>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBlock {
    id: u32,
    label: String,
    term: RawTerm,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawTerm {
    Goto {
        next: u32,
    },
    Branch {
        offsets: Vec<usize>,
        rel: Relation,
        value: RawConstant,
        then: u32,
        #[serde(rename = "else")]
        otherwise: u32,
    },
    Call {
        function: String,
        ret: u32,
    },
    Return,
    Crash,
    Halt,
}

/// TOML integers are signed 64-bit, so wide constants may also be written
/// as strings (`"0xfedcba9876543210"`).
#[derive(Deserialize)]
#[serde(untagged)]
enum RawConstant {
    Int(u64),
    Text(String),
}

impl RawConstant {
    fn value(&self) -> Result<u64> {
        match self {
            RawConstant::Int(v) => Ok(*v),
            RawConstant::Text(s) => {
                let s = s.trim();
                let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
                    Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16),
                    None => s.replace('_', "").parse(),
                };
                parsed.map_err(|_| Error::Semantic(format!("invalid constant {s:?}")))
            }
        }
    }
}

/// Parses and validates a program-model document.
pub fn parse_program(text: &str) -> Result<ProgramModel> {
    let raw: RawProgram = toml::from_str(text).map_err(|e| Error::from_toml(text, &e))?;

    let mut functions = Vec::with_capacity(raw.functions.len());
    for f in raw.functions {
        let mut blocks = Vec::with_capacity(f.blocks.len());
        for b in f.blocks {
            let terminator = match b.term {
                RawTerm::Goto { next } => Terminator::Goto(BlockId(next)),
                RawTerm::Branch {
                    offsets,
                    rel,
                    value,
                    then,
                    otherwise,
                } => Terminator::Branch {
                    cond: BytePredicate::new(offsets, rel, value.value()?)
                        .map_err(|e| Error::Semantic(format!("block {}: {e}", b.id)))?,
                    then_block: BlockId(then),
                    else_block: BlockId(otherwise),
                },
                RawTerm::Call { function, ret } => Terminator::Call {
                    function,
                    return_block: BlockId(ret),
                },
                RawTerm::Return => Terminator::Return,
                RawTerm::Crash => Terminator::Crash,
                RawTerm::Halt => Terminator::Halt,
            };
            blocks.push(BasicBlock {
                id: BlockId(b.id),
                label: b.label,
                terminator,
            });
        }
        functions.push(FunctionDef {
            name: f.name,
            entry_block: BlockId(f.entry),
            blocks,
        });
    }

    ProgramModel::new(functions, raw.entry_function, raw.targets)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
entry_function = "main"

[[function]]
name = "main"
entry = 0

[[function.block]]
id = 0
label = "min.c:1"
term = { kind = "branch", offsets = [0], rel = "eq", value = 0x41, then = 1, else = 2 }

[[function.block]]
id = 1
label = "min.c:2"
term = { kind = "crash" }

[[function.block]]
id = 2
label = "min.c:3"
term = { kind = "halt" }
"#;

    #[test]
    fn minimal_model() {
        let p = parse_program(MINIMAL).unwrap();
        assert_eq!(p.block_count(), 3);
        assert_eq!(p.input_arity(), 1);
        assert_eq!(p.entry_function(), "main");
    }

    #[test]
    fn undefined_callee_is_named() {
        let text = MINIMAL.replace(r#"{ kind = "crash" }"#, r#"{ kind = "call", function = "g", ret = 2 }"#);
        let err = parse_program(&text).unwrap_err();
        assert!(matches!(err, Error::Semantic(_)));
        assert!(err.to_string().contains("`g`"), "{err}");
    }

    #[test]
    fn target_resolves_by_label() {
        let text = MINIMAL.replace("min.c:2", "mif_cod.c:491")
            + "\n[[target]]\nid = \"jasper\"\nlocation = \"mif_cod.c:491\"\n";
        let p = parse_program(&text).unwrap();
        assert_eq!(p.targets()[0].location, "mif_cod.c:491");
        assert_eq!(p.blocks_at("mif_cod.c:491"), vec![BlockId(1)]);
    }

    #[test]
    fn target_without_block_is_rejected() {
        let text = MINIMAL.to_string() + "\n[[target]]\nid = \"x\"\nlocation = \"nowhere.c:1\"\n";
        assert!(matches!(parse_program(&text), Err(Error::Semantic(_))));
    }

    #[test]
    fn syntax_error_reports_position() {
        let text = "entry_function = \"main\"\n[[function]\n";
        match parse_program(text) {
            Err(Error::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn dangling_and_duplicate_blocks_are_rejected() {
        let dangling = MINIMAL.replace("then = 1", "then = 9");
        assert!(matches!(parse_program(&dangling), Err(Error::Semantic(_))));
        let dup = MINIMAL.replace("id = 2", "id = 1");
        assert!(matches!(parse_program(&dup), Err(Error::Semantic(_))));
        let bad_entry = MINIMAL.replace("entry = 0", "entry = 5");
        assert!(matches!(parse_program(&bad_entry), Err(Error::Semantic(_))));
    }

    #[test]
    fn predicate_invariants_are_checked() {
        let unordered = MINIMAL.replace("offsets = [0]", "offsets = [1, 0]");
        assert!(parse_program(&unordered).is_err());
        let too_big = MINIMAL.replace("value = 0x41", "value = 0x141");
        assert!(parse_program(&too_big).is_err());
        let wide = MINIMAL
            .replace("offsets = [0]", "offsets = [0, 1, 2, 3, 4, 5, 6, 7]")
            .replace("value = 0x41", "value = \"0xffee_ddcc_bbaa_9988\"");
        let p = parse_program(&wide).unwrap();
        assert_eq!(p.input_arity(), 8);
    }
}
