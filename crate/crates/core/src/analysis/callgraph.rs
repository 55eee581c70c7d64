use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use super::dominators::dominator_sets;
use crate::program::{BlockId, ProgramModel, Terminator};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CallEdge {
    pub caller: String,
    pub callee: String,
    pub call_site: BlockId,
}

/// Direct-call graph; one edge per `Call` terminator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CallGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<CallEdge>,
}

pub fn build_call_graph(program: &ProgramModel) -> CallGraph {
    let nodes = program.functions().iter().map(|f| f.name.clone()).collect();
    let edges = program
        .functions()
        .iter()
        .flat_map(|f| {
            f.blocks.iter().filter_map(move |b| match &b.terminator {
                Terminator::Call { function, .. } => Some(CallEdge {
                    caller: f.name.clone(),
                    callee: function.clone(),
                    call_site: b.id,
                }),
                _ => None,
            })
        })
        .collect();
    CallGraph { nodes, edges }
}

impl CallGraph {
    fn index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    fn successors(&self) -> Vec<Vec<usize>> {
        let mut succs = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            if let (Some(a), Some(b)) = (self.index(&e.caller), self.index(&e.callee)) {
                if !succs[a].contains(&b) {
                    succs[a].push(b);
                }
            }
        }
        succs
    }

    /// True when `to` is reachable from `from` through one or more calls,
    /// or `from == to`.
    pub fn reaches(&self, from: &str, to: &str) -> bool {
        let (Some(a), Some(b)) = (self.index(from), self.index(to)) else {
            return false;
        };
        let succs = self.successors();
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([a]);
        seen[a] = true;
        while let Some(v) = queue.pop_front() {
            if v == b {
                return true;
            }
            for &s in &succs[v] {
                if !seen[s] {
                    seen[s] = true;
                    queue.push_back(s);
                }
            }
        }
        false
    }

    /// Functions dominating `function` in the call graph rooted at `root`,
    /// ordered root-first. `None` when `function` is unreachable.
    pub fn dominator_chain(&self, root: &str, function: &str) -> Option<Vec<String>> {
        let r = self.index(root)?;
        let f = self.index(function)?;
        let doms = dominator_sets(&self.successors(), r);
        let set: &BTreeSet<usize> = doms[f].as_ref()?;
        let mut chain: Vec<usize> = set.iter().copied().collect();
        chain.sort_by_key(|&d| doms[d].as_ref().map_or(0, BTreeSet::len));
        Some(chain.into_iter().map(|d| self.nodes[d].clone()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_program;

    fn program(body: &str) -> ProgramModel {
        parse_program(&format!("entry_function = \"main\"\n{body}")).unwrap()
    }

    const MAIN_F_G: &str = r#"
[[function]]
name = "main"
entry = 0
[[function.block]]
id = 0
label = "m.c:1"
term = { kind = "call", function = "f", ret = 1 }
[[function.block]]
id = 1
label = "m.c:2"
term = { kind = "halt" }
[[function]]
name = "f"
entry = 10
[[function.block]]
id = 10
label = "f.c:1"
term = { kind = "call", function = "g", ret = 11 }
[[function.block]]
id = 11
label = "f.c:2"
term = { kind = "return" }
[[function]]
name = "g"
entry = 20
[[function.block]]
id = 20
label = "g.c:1"
term = { kind = "return" }
"#;

    #[test]
    fn chain_of_calls() {
        let cg = build_call_graph(&program(MAIN_F_G));
        let pairs: Vec<_> = cg
            .edges
            .iter()
            .map(|e| (e.caller.as_str(), e.callee.as_str()))
            .collect();
        assert_eq!(pairs, vec![("main", "f"), ("f", "g")]);
        assert!(cg.reaches("main", "g"));
        assert!(!cg.reaches("g", "main"));
        assert_eq!(
            cg.dominator_chain("main", "g").unwrap(),
            vec!["main", "f", "g"]
        );
    }

    #[test]
    fn no_calls_no_edges() {
        let cg = build_call_graph(&program(
            "[[function]]\nname = \"main\"\nentry = 0\n[[function.block]]\nid = 0\nlabel = \"m.c:1\"\nterm = { kind = \"halt\" }\n",
        ));
        assert!(cg.edges.is_empty());
        assert_eq!(cg.nodes, vec!["main"]);
    }

    #[test]
    fn two_call_sites_give_two_edges() {
        let text = MAIN_F_G.replace(
            "term = { kind = \"halt\" }",
            "term = { kind = \"call\", function = \"f\", ret = 2 }\n[[function.block]]\nid = 2\nlabel = \"m.c:3\"\nterm = { kind = \"halt\" }",
        );
        let p = program(&text);
        let cg = build_call_graph(&p);
        let sites: Vec<_> = cg
            .edges
            .iter()
            .filter(|e| e.caller == "main" && e.callee == "f")
            .map(|e| e.call_site)
            .collect();
        assert_eq!(sites, vec![BlockId(0), BlockId(1)]);
    }
}
