//! Graphviz export. Edges taken on `x_k = 1` are blue, on `x_k = 0` red.

use std::fmt::Write as _;

use super::{NodeKind, Program, Segment};

#[derive(Debug, Clone, Default)]
pub struct DotOptions {
    /// Graph name; `"ambp"` when unset.
    pub title: Option<String>,
    /// Only nodes in these segments are drawn.
    pub segments: Option<Vec<Segment>>,
    /// Only nodes with level in this inclusive range are drawn.
    pub levels: Option<(u32, u32)>,
}

impl DotOptions {
    fn keeps(&self, program: &Program, i: usize) -> bool {
        let r = &program.nodes[i];
        self.segments.as_ref().is_none_or(|s| s.contains(&r.segment))
            && self.levels.is_none_or(|(lo, hi)| (lo..=hi).contains(&r.level))
    }
}

/// Programs above `n = 2` produce graphs too large to lay out usefully.
pub fn size_warning(program: &Program) -> Option<String> {
    (program.n > 2).then(|| {
        format!(
            "warning: DOT export of an n = {} program has {} nodes and {} edges",
            program.n,
            program.nodes.len(),
            program.edges.len()
        )
    })
}

pub fn export_dot(program: &Program, options: &DotOptions) -> String {
    let mut out = String::new();
    let title = options.title.as_deref().unwrap_or("ambp");
    let _ = writeln!(out, "digraph \"{title}\" {{");
    out.push_str("  rankdir=TB;\n  node [fontsize=10];\n");

    let kinds = program.node_kinds();
    let keep: Vec<bool> = (0..program.nodes.len()).map(|i| options.keeps(program, i)).collect();
    let positions = |list: &[super::NodeId]| {
        let mut pos = vec![0usize; program.nodes.len()];
        for (k, id) in list.iter().enumerate() {
            if let Some(p) = pos.get_mut(id.index()) {
                *p = k + 1;
            }
        }
        pos
    };
    let (start_pos, accept_pos, reject_pos) =
        (positions(&program.starts), positions(&program.accepts), positions(&program.rejects));

    for (i, r) in program.nodes.iter().enumerate().filter(|(i, _)| keep[*i]) {
        let (shape, tag) = match kinds[i] {
            NodeKind::Start => ("box", format!("s{}", start_pos[i])),
            NodeKind::Accept => ("doublecircle", format!("a{}", accept_pos[i])),
            NodeKind::Reject => ("doubleoctagon", format!("r{}", reject_pos[i])),
            NodeKind::Dead => ("octagon", "dead".to_string()),
            NodeKind::Root => ("diamond", "root".to_string()),
            NodeKind::Internal => ("ellipse", String::new()),
        };
        let sep = if tag.is_empty() { "" } else { "\\n" };
        let _ = writeln!(
            out,
            "  n{i} [shape={shape}, label=\"{tag}{sep}{} L{}\\n{:x}#{}\"];",
            r.segment, r.level, r.func.0, r.replica
        );
    }
    for e in program.edges.iter().filter(|e| keep[e.src.index()] && keep[e.dst.index()]) {
        let color = if e.bit { "blue" } else { "red" };
        let _ = writeln!(out, "  n{} -> n{} [color={color}, label=\"x{}\"];", e.src, e.dst, e.var);
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    #[test]
    fn colors_and_shapes() {
        let dot = export_dot(&identity_program(), &DotOptions::default());
        assert!(dot.contains("n0 -> n1 [color=blue, label=\"x1\"]"));
        assert!(dot.contains("n0 -> n2 [color=red, label=\"x1\"]"));
        assert!(dot.contains("n0 [shape=box"));
        assert!(dot.contains("n1 [shape=doublecircle"));
        assert_eq!(dot, export_dot(&identity_program(), &DotOptions::default()));
        assert!(size_warning(&identity_program()).is_none());
    }

    #[test]
    fn level_filter() {
        let opts = DotOptions { levels: Some((0, 0)), ..Default::default() };
        let dot = export_dot(&identity_program(), &opts);
        assert!(dot.contains("n0 ["));
        assert!(!dot.contains("n1 ["));
        assert!(!dot.contains("->"));
    }
}
