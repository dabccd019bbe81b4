//! GraphViz (DOT) export with deterministic node ordering.

use crate::lts::Lts;

pub fn write_dot(l: &Lts) -> String {
    let mut out = String::new();
    out.push_str(&format!("digraph \"{}\" {{\n", l.name()));
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=circle];\n");
    out.push_str("  __start [shape=point];\n");
    for s in l.states() {
        let shape = if l.is_final(s) { " [shape=doublecircle]" } else { "" };
        out.push_str(&format!("  \"{}\"{};\n", l.state_name(s), shape));
    }
    out.push_str(&format!("  __start -> \"{}\";\n", l.state_name(l.initial())));
    for s in l.states() {
        for (label, t) in l.outgoing(s) {
            out.push_str(&format!(
                "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
                l.state_name(s),
                l.state_name(t),
                label
            ));
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use crate::lts::Lts;

    #[test]
    fn export_is_deterministic_and_marks_finals() {
        let l = Lts::from_text("lts a\ninit s\ns 1!x t\nfinal t\n").unwrap();
        let dot = l.to_dot();
        assert_eq!(dot, l.to_dot());
        assert!(dot.contains("doublecircle"));
        assert!(dot.contains("\"s\" -> \"t\" [label=\"1!x\"]"));
    }
}
