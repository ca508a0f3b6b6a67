//! Bounded-depth text renderings of continuity trees.
//!
//! Both renderings unfold the tree (shared nodes are drawn once per path).
//! Writing nodes are labelled `N`, `Z` or `P`; reading nodes are labelled
//! `x<i>`, or left blank when the tree has a single input.

use std::fmt::Write;

use crate::error::{CoreError, Result};
use crate::tree::{CTree, Step};

/// Renders refuse to unfold more nodes than this.
pub const MAX_RENDER_NODES: usize = 200_000;

/// Depths above this are rejected.
pub const MAX_RENDER_DEPTH: usize = 32;

fn read_label(arity: usize, index: usize) -> String {
    if arity == 1 {
        String::new()
    } else {
        format!("x{index}")
    }
}

fn check_depth(depth: usize) -> Result<()> {
    if depth > MAX_RENDER_DEPTH {
        return Err(CoreError::domain(format!(
            "render depth {depth} exceeds {MAX_RENDER_DEPTH}"
        )));
    }
    Ok(())
}

fn budget_exceeded() -> CoreError {
    CoreError::ResourceLimit(format!("render would exceed {MAX_RENDER_NODES} nodes"))
}

/// Indented rendering, two characters per level. Reading nodes of unary
/// trees are drawn as `*`; branches follow in the order `N`, `Z`, `P`.
pub fn render_ascii(t: &CTree, depth: usize) -> Result<String> {
    check_depth(depth)?;
    let mut out = String::new();
    let mut budget = MAX_RENDER_NODES;
    ascii(t, depth, 0, &mut budget, &mut out)?;
    Ok(out)
}

fn ascii(t: &CTree, depth: usize, level: usize, budget: &mut usize, out: &mut String) -> Result<()> {
    if level == depth {
        return Ok(());
    }
    *budget = budget.checked_sub(1).ok_or_else(budget_exceeded)?;
    let pad = "  ".repeat(level);
    match t.node() {
        Step::Write(d, next) => {
            let _ = writeln!(out, "{pad}{d}");
            ascii(&next, depth, level + 1, budget, out)
        }
        Step::Read(i, br) => {
            let label = read_label(t.arity(), i);
            let _ = writeln!(out, "{pad}{}", if label.is_empty() { "*" } else { &label });
            br.iter().try_for_each(|b| ascii(b, depth, level + 1, budget, out))
        }
    }
}

/// Graphviz rendering: circles for every node, edges in `N`, `Z`, `P` order.
pub fn render_dot(t: &CTree, depth: usize) -> Result<String> {
    check_depth(depth)?;
    let mut out = String::from("digraph ctree {\n  ordering=out;\n  node [shape=circle];\n");
    let mut next_id = 0usize;
    let mut budget = MAX_RENDER_NODES;
    if depth > 0 {
        dot(t, depth, 0, &mut next_id, &mut budget, &mut out)?;
    }
    out.push_str("}\n");
    Ok(out)
}

fn dot(
    t: &CTree,
    depth: usize,
    level: usize,
    next_id: &mut usize,
    budget: &mut usize,
    out: &mut String,
) -> Result<usize> {
    *budget = budget.checked_sub(1).ok_or_else(budget_exceeded)?;
    let id = *next_id;
    *next_id += 1;
    let children = match t.node() {
        Step::Write(d, next) => {
            let _ = writeln!(out, "  n{id} [label=\"{d}\"];");
            vec![next]
        }
        Step::Read(i, br) => {
            let _ = writeln!(out, "  n{id} [label=\"{}\"];", read_label(t.arity(), i));
            br.to_vec()
        }
    };
    if level + 1 < depth {
        for c in &children {
            let child = dot(c, depth, level + 1, next_id, budget, out)?;
            let _ = writeln!(out, "  n{id} -> n{child};");
        }
    }
    Ok(id)
}
