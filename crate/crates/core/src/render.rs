//! Canonical text form of proof outlines.

use std::fmt::Write;

use crate::syntax::{Block, Command, Config, ProofOutline};

pub fn render_outline(o: &ProofOutline) -> String {
    let mut s = String::new();
    render_config(&mut s, &o.config);
    let _ = writeln!(s, "\npre {{ {} }}\n", o.precondition);
    for t in &o.threads {
        let _ = writeln!(s, "thread {} {{", t.tid);
        render_block(&mut s, &t.body, 1);
        let _ = writeln!(s, "}}\n");
    }
    let _ = writeln!(s, "post {{ {} }}", o.postcondition);
    s
}

fn render_config(s: &mut String, c: &Config) {
    let join = |items: Vec<String>| items.join(" ");
    let _ = writeln!(s, "config {{");
    let _ = writeln!(s, "  threads: {};", join(c.threads.iter().map(|t| t.to_string()).collect()));
    let _ = writeln!(s, "  globals: {};", join(c.globals.clone()));
    let _ =
        writeln!(s, "  registers: {};", join(c.registers.iter().map(|r| format!("{}@{}", r.name, r.owner)).collect()));
    let _ = writeln!(s, "  values: {};", join(c.values.iter().map(|v| v.to_string()).collect()));
    let _ = writeln!(s, "}}");
}

fn render_block(s: &mut String, b: &Block, depth: usize) {
    let pad = "  ".repeat(depth);
    let _ = writeln!(s, "{pad}{{ {} }}", b.pre);
    for step in &b.steps {
        match &step.command {
            Command::Atomic(a) => {
                let _ = writeln!(s, "{pad}{a};");
            }
            Command::If { cond, then_branch, else_branch } => {
                let _ = writeln!(s, "{pad}if ({cond}) {{");
                render_block(s, then_branch, depth + 1);
                let _ = writeln!(s, "{pad}}} else {{");
                render_block(s, else_branch, depth + 1);
                let _ = writeln!(s, "{pad}}}");
            }
            Command::While { cond, invariant, body } => {
                let _ = writeln!(s, "{pad}while ({cond}) invariant {{ {invariant} }} {{");
                render_block(s, body, depth + 1);
                let _ = writeln!(s, "{pad}}}");
            }
        }
        let _ = writeln!(s, "{pad}{{ {} }}", step.post);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_outline;

    #[test]
    fn minimal_skip_outline_is_canonical() {
        let o = parse_outline("thread 1 { {true} skip {true} }").unwrap();
        let text = render_outline(&o);
        assert_eq!(
            text,
            "config {\n  threads: 1;\n  globals: ;\n  registers: ;\n  values: 0 1;\n}\n\npre { true }\n\n\
             thread 1 {\n  { true }\n  skip;\n  { true }\n}\n\npost { true }\n"
        );
        assert_eq!(parse_outline(&text).unwrap(), o);
    }
}
