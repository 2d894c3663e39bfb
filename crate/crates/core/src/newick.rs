//! Newick and extended-Newick (eNewick) reading and writing.
//!
//! Trees use standard rooted Newick with mandatory leaf labels; internal
//! labels and branch lengths are parsed and discarded.  Networks use the
//! `#H<tag>` hybrid convention: every occurrence of the same tag denotes the
//! same reticulation vertex, and exactly one occurrence may carry the subtree
//! hanging below it.
//!
//! Labels match `[A-Za-z0-9_.-]+`; whitespace is insignificant outside
//! labels; the trailing semicolon is required.

use std::collections::HashMap;

use thiserror::Error;

use crate::network::{Label, Network, Tree, VertexId};

/// Severity of a parse diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// A positioned message about the input text.
#[derive(Debug, Clone)]
pub struct ParseDiagnostic {
    /// Byte offset into the input, 0-based.
    pub position: usize,
    pub message: String,
    pub severity: Severity,
}

#[derive(Debug, Error)]
#[error("parse error at byte {}: {}", .0.position, .0.message)]
pub struct ParseError(pub ParseDiagnostic);

impl ParseError {
    fn new(position: usize, message: impl Into<String>) -> Self {
        ParseError(ParseDiagnostic {
            position,
            message: message.into(),
            severity: Severity::Error,
        })
    }

    pub fn position(&self) -> usize {
        self.0.position
    }
}

fn is_label_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'.' || b == b'-'
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn take_label(&mut self) -> Option<(usize, String)> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && is_label_byte(self.bytes[self.pos]) {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            let s = std::str::from_utf8(&self.bytes[start..self.pos]).ok()?;
            Some((start, s.to_string()))
        }
    }

    /// Parses and discards an optional `:<branch length>`.
    fn take_length(&mut self) -> Result<(), ParseError> {
        if self.peek() == Some(b':') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.bytes.len()
                && matches!(
                    self.bytes[self.pos],
                    b'0'..=b'9' | b'.' | b'-' | b'+' | b'e' | b'E'
                )
            {
                self.pos += 1;
            }
            let txt = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap_or("");
            if txt.parse::<f64>().is_err() {
                return Err(ParseError::new(start, "expected a branch length"));
            }
        }
        Ok(())
    }
}

struct Builder {
    net: Network,
    /// Position of the token that introduced each vertex.
    positions: Vec<usize>,
    hybrids: HashMap<String, VertexId>,
    hybrid_has_subtree: HashMap<String, bool>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            net: Network::new(),
            positions: Vec::new(),
            hybrids: HashMap::new(),
            hybrid_has_subtree: HashMap::new(),
        }
    }

    fn fresh(&mut self, pos: usize) -> VertexId {
        let v = self.net.add_vertex();
        self.positions.push(pos);
        v
    }
}

/// One open `(` group being collected.
struct Frame {
    open_pos: usize,
    children: Vec<VertexId>,
}

fn parse_into_network(
    text: &str,
    allow_hybrids: bool,
) -> Result<(Network, Vec<usize>), ParseError> {
    let mut cur = Cursor::new(text);
    let mut b = Builder::new();
    let mut frames: Vec<Frame> = Vec::new();
    // The subtree finished most recently and not yet attached to a parent.
    let mut done: Option<VertexId> = None;

    loop {
        match cur.peek() {
            Some(b'(') => {
                if done.is_some() {
                    return Err(ParseError::new(cur.pos, "unexpected '('"));
                }
                frames.push(Frame {
                    open_pos: cur.pos,
                    children: Vec::new(),
                });
                cur.pos += 1;
            }
            Some(b',') => {
                let frame = frames
                    .last_mut()
                    .ok_or_else(|| ParseError::new(cur.pos, "',' outside parentheses"))?;
                let child = done
                    .take()
                    .ok_or_else(|| ParseError::new(cur.pos, "expected a subtree before ','"))?;
                frame.children.push(child);
                cur.pos += 1;
            }
            Some(b')') => {
                let mut frame = frames
                    .pop()
                    .ok_or_else(|| ParseError::new(cur.pos, "unmatched ')'"))?;
                let child = done
                    .take()
                    .ok_or_else(|| ParseError::new(cur.pos, "expected a subtree before ')'"))?;
                frame.children.push(child);
                cur.pos += 1;
                if frame.children.len() > 2 {
                    return Err(ParseError::new(
                        frame.open_pos,
                        format!("non-binary vertex with {} children", frame.children.len()),
                    ));
                }
                // Optional internal name (ignored), optional hybrid tag,
                // optional branch length.
                let name = cur.take_label();
                let v = if cur.peek() == Some(b'#') {
                    let tag_pos = cur.pos;
                    if !allow_hybrids {
                        return Err(ParseError::new(tag_pos, "'#' is not valid in a tree"));
                    }
                    cur.pos += 1;
                    let (_, tag) = cur.take_label().ok_or_else(|| {
                        ParseError::new(tag_pos, "expected a hybrid tag after '#'")
                    })?;
                    let v = resolve_hybrid(&mut b, &tag, tag_pos);
                    if std::mem::replace(b.hybrid_has_subtree.get_mut(&tag).unwrap(), true) {
                        return Err(ParseError::new(
                            tag_pos,
                            format!("hybrid #{tag} is given a subtree more than once"),
                        ));
                    }
                    v
                } else {
                    let _ = name;
                    b.fresh(frame.open_pos)
                };
                cur.take_length()?;
                for c in frame.children {
                    b.net.add_arc(v, c);
                }
                done = Some(v);
            }
            Some(b'#') => {
                if done.is_some() {
                    return Err(ParseError::new(cur.pos, "unexpected '#'"));
                }
                let tag_pos = cur.pos;
                if !allow_hybrids {
                    return Err(ParseError::new(tag_pos, "'#' is not valid in a tree"));
                }
                cur.pos += 1;
                let (_, tag) = cur
                    .take_label()
                    .ok_or_else(|| ParseError::new(tag_pos, "expected a hybrid tag after '#'"))?;
                let v = resolve_hybrid(&mut b, &tag, tag_pos);
                cur.take_length()?;
                done = Some(v);
            }
            Some(b';') => {
                cur.pos += 1;
                break;
            }
            Some(_) => {
                if done.is_some() {
                    return Err(ParseError::new(cur.pos, "expected ',', ')' or ';'"));
                }
                let (pos, name) = cur
                    .take_label()
                    .ok_or_else(|| ParseError::new(cur.pos, "unexpected character"))?;
                // A name may introduce a leaf or prefix a hybrid tag.
                if cur.peek() == Some(b'#') {
                    let tag_pos = cur.pos;
                    if !allow_hybrids {
                        return Err(ParseError::new(tag_pos, "'#' is not valid in a tree"));
                    }
                    cur.pos += 1;
                    let (_, tag) = cur.take_label().ok_or_else(|| {
                        ParseError::new(tag_pos, "expected a hybrid tag after '#'")
                    })?;
                    let v = resolve_hybrid(&mut b, &tag, tag_pos);
                    cur.take_length()?;
                    done = Some(v);
                } else {
                    let label = Label::taxon(&name);
                    if b.net.leaf_by_label(&label).is_some() {
                        return Err(ParseError::new(
                            pos,
                            format!("duplicate leaf label '{name}'"),
                        ));
                    }
                    let v = b.fresh(pos);
                    b.net.set_label(v, label);
                    cur.take_length()?;
                    done = Some(v);
                }
            }
            None => {
                return Err(ParseError::new(
                    cur.pos,
                    "unexpected end of input (missing ';'?)",
                ));
            }
        }
    }

    cur.skip_ws();
    if cur.pos != cur.bytes.len() {
        return Err(ParseError::new(cur.pos, "trailing input after ';'"));
    }
    if !frames.is_empty() {
        return Err(ParseError::new(frames[0].open_pos, "unclosed '('"));
    }
    let root = done.ok_or_else(|| ParseError::new(0, "empty input"))?;
    b.net.set_root(root);
    Ok((b.net, b.positions))
}

fn resolve_hybrid(b: &mut Builder, tag: &str, pos: usize) -> VertexId {
    if let Some(&v) = b.hybrids.get(tag) {
        return v;
    }
    let v = b.fresh(pos);
    b.hybrids.insert(tag.to_string(), v);
    b.hybrid_has_subtree.insert(tag.to_string(), false);
    v
}

fn validate_parsed(net: Network, positions: &[usize]) -> Result<Network, ParseError> {
    let report = net.validate();
    if let Some(first) = report.violations.first() {
        use crate::network::Violation::*;
        let pos = match first {
            DegreeViolation(v) | UnlabeledSink(v) | LabeledInternal(v) | ReticulationLeaf(v) => {
                positions.get(v.idx()).copied().unwrap_or(0)
            }
            MultipleSources(vs) => vs
                .first()
                .and_then(|v| positions.get(v.idx()))
                .copied()
                .unwrap_or(0),
            _ => 0,
        };
        return Err(ParseError::new(pos, first.to_string()));
    }
    Ok(net)
}

/// Parses an extended-Newick network.
pub fn parse_network(text: &str) -> Result<Network, ParseError> {
    let (net, positions) = parse_into_network(text, true)?;
    validate_parsed(net, &positions)
}

/// Parses a rooted binary Newick tree with unique leaf labels.
pub fn parse_tree(text: &str) -> Result<Tree, ParseError> {
    let (net, positions) = parse_into_network(text, false)?;
    let net = validate_parsed(net, &positions)?;
    Tree::try_new(net).map_err(|e| ParseError::new(0, e.to_string()))
}

/// Serializes a network (or tree) to extended Newick.
///
/// Children are emitted in stored order and hybrid tags are numbered in
/// first-visit order, so output is deterministic; the subtree below a
/// reticulation is written at its first occurrence.
pub fn serialize_network(net: &Network) -> String {
    let mut out = String::new();
    let mut hybrid_ids: HashMap<VertexId, usize> = HashMap::new();
    let mut next_hybrid = 0usize;

    enum Step {
        Visit(VertexId),
        Text(&'static str),
        Tag(usize),
    }

    let mut stack = vec![Step::Visit(net.root())];
    while let Some(step) = stack.pop() {
        match step {
            Step::Text(t) => out.push_str(t),
            Step::Tag(id) => {
                out.push_str("#H");
                out.push_str(&id.to_string());
            }
            Step::Visit(v) => {
                if net.is_reticulation(v) {
                    if let Some(&id) = hybrid_ids.get(&v) {
                        out.push_str("#H");
                        out.push_str(&id.to_string());
                        continue;
                    }
                    let id = next_hybrid;
                    next_hybrid += 1;
                    hybrid_ids.insert(v, id);
                    // First visit carries the subtree: (child)#Hid
                    stack.push(Step::Tag(id));
                    stack.push(Step::Text(")"));
                    stack.push(Step::Visit(net.children(v)[0]));
                    stack.push(Step::Text("("));
                } else if net.is_leaf(v) {
                    out.push_str(&net.label(v).expect("leaves are labeled").to_string());
                } else {
                    stack.push(Step::Text(")"));
                    let children = net.children(v);
                    for (i, &c) in children.iter().enumerate().rev() {
                        stack.push(Step::Visit(c));
                        if i > 0 {
                            stack.push(Step::Text(","));
                        }
                    }
                    stack.push(Step::Text("("));
                }
            }
        }
    }
    out.push(';');
    out
}
