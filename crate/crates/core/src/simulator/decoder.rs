//! Decoding the wire bit stream back into symbols, using nothing but the
//! scheme's codebooks.

use crate::error::{Error, Result};
use crate::schemes::{SchemeKind, SchemeSpec};

const NONE: usize = usize::MAX;

#[derive(Clone, Copy)]
enum Node {
    Inner([usize; 2]),
    /// Message symbol index, or `None` for the null codeword.
    Leaf(Option<usize>),
}

/// Incremental decoder: feed one slot at a time, get a symbol back when a
/// message codeword completes.
#[derive(Clone)]
pub struct StreamDecoder {
    nodes: Vec<Node>,
    /// Current trie node.
    at: usize,
    /// Naive framing: waiting for the flag bit.
    expect_flag: bool,
    naive: bool,
}

impl StreamDecoder {
    pub fn new(scheme: &SchemeSpec) -> Result<Self> {
        let mut nodes = vec![Node::Inner([NONE, NONE])];
        let book = scheme.message_codebook();
        let mut words: Vec<(Option<usize>, &[bool])> =
            book.codewords().iter().enumerate().map(|(i, c)| (Some(i), c.bits())).collect();
        if let Some(null) = scheme.null_codeword() {
            words.push((None, null.bits()));
        }
        for (sym, bits) in words {
            let mut at = 0;
            for (k, &b) in bits.iter().enumerate() {
                let Node::Inner(children) = nodes[at] else {
                    return Err(Error::InvalidAlphabet("codebook is not prefix-free".into()));
                };
                let next = children[usize::from(b)];
                at = if next == NONE {
                    let fresh = nodes.len();
                    let last = k + 1 == bits.len();
                    nodes.push(if last { Node::Leaf(sym) } else { Node::Inner([NONE, NONE]) });
                    if let Node::Inner(c) = &mut nodes[at] {
                        c[usize::from(b)] = fresh;
                    }
                    fresh
                } else {
                    next
                };
            }
        }
        let naive = scheme.kind() == SchemeKind::Naive;
        Ok(Self { nodes, at: 0, expect_flag: naive, naive })
    }

    /// Consumes the bit sent in slot `slot` (`None` = φ). Returns the
    /// message symbol whose codeword this bit completes.
    pub fn push(&mut self, slot: u64, bit: Option<bool>) -> Result<Option<usize>> {
        let Some(b) = bit else {
            if self.at != 0 || (self.naive && !self.expect_flag) {
                return Err(Error::Decode { slot, msg: "empty-buffer signal inside a codeword".into() });
            }
            return Ok(None);
        };
        if self.expect_flag {
            // `1` announces a message, `0` is a complete idle word.
            self.expect_flag = !b;
            return Ok(None);
        }
        let Node::Inner(children) = self.nodes[self.at] else { unreachable!("leaves reset") };
        let next = children[usize::from(b)];
        if next == NONE {
            return Err(Error::Decode { slot, msg: "bit sequence matches no codeword".into() });
        }
        match self.nodes[next] {
            Node::Inner(_) => {
                self.at = next;
                Ok(None)
            }
            Node::Leaf(sym) => {
                self.at = 0;
                self.expect_flag = self.naive;
                Ok(sym)
            }
        }
    }

    /// Whether the decoder sits at a codeword boundary.
    pub fn at_boundary(&self) -> bool {
        self.at == 0 && (!self.naive || self.expect_flag)
    }
}

/// Decodes a whole stream of per-slot bits starting at slot 0. Returns
/// `(decode time, symbol index)` pairs; a codeword ending in slot `t`
/// decodes at `t + 1`.
pub fn decode_stream(scheme: &SchemeSpec, bits: &[Option<bool>]) -> Result<Vec<(u64, usize)>> {
    let mut dec = StreamDecoder::new(scheme)?;
    let mut out = Vec::new();
    for (t, &b) in bits.iter().enumerate() {
        if let Some(sym) = dec.push(t as u64, b)? {
            out.push((t as u64 + 1, sym));
        }
    }
    Ok(out)
}
