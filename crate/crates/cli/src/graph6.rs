//! The graph6 text format for simple graphs: a size field, then the upper
//! triangle of the adjacency matrix read column by column, packed into 6-bit
//! groups offset by 63. Import is the main direction; encoding exists so
//! fixtures and round-trip tests can be produced locally.

use anyhow::{bail, Result};

use hyperdeck_core::hypergraph::Hypergraph;

const OFFSET: u8 = 63;
const HEADER: &str = ">>graph6<<";

fn decode_size(bytes: &[u8]) -> Result<(usize, usize)> {
    if bytes[0] != b'~' {
        return Ok(((bytes[0] - OFFSET) as usize, 1));
    }
    if bytes.len() >= 2 && bytes[1] == b'~' {
        bail!("graph6 sizes above 258047 are not supported");
    }
    if bytes.len() < 4 {
        bail!("truncated graph6 size field");
    }
    let n = bytes[1..4]
        .iter()
        .fold(0usize, |acc, &b| (acc << 6) | (b - OFFSET) as usize);
    Ok((n, 4))
}

/// Parses one graph6 line, tolerating the optional format header. Sparse6
/// and digraph6 lines are rejected, as are nonzero padding bits.
pub fn decode(line: &str) -> Result<Hypergraph> {
    let line = line.trim();
    let line = line.strip_prefix(HEADER).unwrap_or(line);
    if line.is_empty() {
        bail!("empty graph6 line");
    }
    if line.starts_with(':') || line.starts_with(';') || line.starts_with('&') {
        bail!("sparse6/digraph6 lines are not supported, only graph6");
    }
    let bytes = line.as_bytes();
    if let Some(&bad) = bytes.iter().find(|b| !(OFFSET..=126).contains(b)) {
        bail!("byte {bad:#04x} is outside the graph6 alphabet");
    }
    let (n, at) = decode_size(bytes)?;
    let bit_count = n * n.saturating_sub(1) / 2;
    let groups = bit_count.div_ceil(6);
    if bytes.len() - at != groups {
        bail!(
            "expected {groups} data bytes for {n} vertices, found {}",
            bytes.len() - at
        );
    }
    let data = &bytes[at..];
    let bit_at = |bit: usize| (data[bit / 6] - OFFSET) & (1 << (5 - bit % 6)) != 0;
    let mut pairs = Vec::new();
    let mut bit = 0;
    for j in 1..n {
        for i in 0..j {
            if bit_at(bit) {
                pairs.push((i, j));
            }
            bit += 1;
        }
    }
    if (bit_count..groups * 6).any(bit_at) {
        bail!("nonzero padding bits");
    }
    Ok(Hypergraph::graph(n, &pairs)?)
}

/// Encodes a simple arity-2 hypergraph.
pub fn encode(g: &Hypergraph) -> Result<String> {
    let n = g.vertex_count();
    if g.arities().any(|j| j != 2) || !g.is_simple() {
        bail!("graph6 carries simple graphs only");
    }
    let mut out = Vec::new();
    if n <= 62 {
        out.push(n as u8 + OFFSET);
    } else if n <= 258047 {
        out.push(b'~');
        out.extend((0..3).rev().map(|s| ((n >> (6 * s)) as u8 & 0x3f) + OFFSET));
    } else {
        bail!("graph6 sizes above 258047 are not supported");
    }
    let mut adjacent = vec![false; n * n];
    for edge in g.edges(2) {
        adjacent[edge[0] * n + edge[1]] = true;
    }
    let bit_count = n * n.saturating_sub(1) / 2;
    let mut group = 0u8;
    let mut bit = 0;
    for j in 1..n {
        for i in 0..j {
            if adjacent[i * n + j] {
                group |= 1 << (5 - bit % 6);
            }
            bit += 1;
            if bit % 6 == 0 {
                out.push(group + OFFSET);
                group = 0;
            }
        }
    }
    if bit_count % 6 != 0 {
        out.push(group + OFFSET);
    }
    Ok(String::from_utf8(out).expect("graph6 bytes are ASCII"))
}
