//! Text and binary file formats.
//!
//! * Edge lists: one `u v` pair of non-negative integer ids per line; blank lines
//!   and lines starting with `#` are skipped. Edges are undirected, self-loops and
//!   repeats are dropped, and ids are compacted to `0..n` in ascending order.
//! * Label files: one label per line, line `i` for node `i`; `-` marks a node
//!   without a label.
//! * Clustering-matrix files: the dimension `n` as a little-endian `u64`, then
//!   the `n²` entries as little-endian `f64` in row-major order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use pace_core::graph::Graph;
use pace_core::linalg::DenseMatrix;
use pace_core::MembershipMatrix;

use crate::error::{Error, Result};

/// A graph read from an edge list, with the original id of every node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeList {
    pub graph: Graph,
    /// `ids[i]` is the id node `i` carried in the file.
    pub ids: Vec<u64>,
}

fn parse_id(token: Option<&str>, line: usize) -> Result<u64> {
    let token = token.ok_or_else(|| Error::Parse { line, message: "expected two node ids".into() })?;
    token
        .parse()
        .map_err(|_| Error::Parse { line, message: format!("`{token}` is not a non-negative integer id") })
}

pub fn load_edge_list<R: BufRead>(reader: R) -> Result<EdgeList> {
    let mut raw = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line.map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let u = parse_id(tokens.next(), line_no)?;
        let v = parse_id(tokens.next(), line_no)?;
        if let Some(extra) = tokens.next() {
            return Err(Error::Parse { line: line_no, message: format!("unexpected third field `{extra}`") });
        }
        raw.push((u, v));
    }
    let mut ids: Vec<u64> = raw.iter().flat_map(|&(u, v)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    let index = |id: u64| ids.binary_search(&id).expect("every id was collected");
    let graph = Graph::from_edges(ids.len(), raw.iter().map(|&(u, v)| (index(u), index(v))))?;
    Ok(EdgeList { graph, ids })
}

pub fn read_edge_list(path: &Path) -> Result<EdgeList> {
    load_edge_list(BufReader::new(open(path)?))
}

/// Writes each undirected edge once as `u v` with `u < v`.
pub fn write_edge_list<W: Write>(graph: &Graph, mut writer: W) -> std::io::Result<()> {
    for (u, v) in graph.edges() {
        writeln!(writer, "{u} {v}")?;
    }
    writer.flush()
}

pub fn load_labels<R: BufRead>(reader: R) -> Result<Vec<Option<usize>>> {
    let mut labels = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line.map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
        let token = line.trim();
        if token.is_empty() {
            continue;
        }
        if token == "-" {
            labels.push(None);
            continue;
        }
        let label = token
            .parse()
            .map_err(|_| Error::Parse { line: line_no, message: format!("`{token}` is not a label") })?;
        labels.push(Some(label));
    }
    Ok(labels)
}

pub fn read_labels(path: &Path) -> Result<Vec<Option<usize>>> {
    load_labels(BufReader::new(open(path)?))
}

/// A membership with `k` one past the largest label.
pub fn labels_to_membership(labels: &[Option<usize>]) -> Result<MembershipMatrix> {
    let k = labels.iter().flatten().max().map_or(1, |&l| l + 1);
    let labels = labels
        .iter()
        .map(|l| l.map(|l| u32::try_from(l).map_err(|_| Error::Usage(format!("label {l} is too large")))).transpose())
        .collect::<Result<Vec<_>>>()?;
    Ok(MembershipMatrix::new(k, labels)?)
}

pub fn write_labels<W: Write>(membership: &MembershipMatrix, mut writer: W) -> std::io::Result<()> {
    for label in membership.labels() {
        match label {
            Some(l) => writeln!(writer, "{l}")?,
            None => writeln!(writer, "-")?,
        }
    }
    writer.flush()
}

pub fn write_chat<W: Write>(chat: &DenseMatrix, mut writer: W) -> std::io::Result<()> {
    writer.write_all(&(chat.rows() as u64).to_le_bytes())?;
    for v in chat.as_slice() {
        writer.write_all(&v.to_le_bytes())?;
    }
    writer.flush()
}

pub fn read_chat<R: Read>(mut reader: R) -> Result<DenseMatrix> {
    let mut header = [0u8; 8];
    reader.read_exact(&mut header).map_err(|e| Error::Format(format!("missing header: {e}")))?;
    let n = usize::try_from(u64::from_le_bytes(header))
        .map_err(|_| Error::Format("dimension does not fit in memory".into()))?;
    let len = n.checked_mul(n).ok_or_else(|| Error::Format(format!("dimension {n} is too large")))?;
    let mut body = Vec::new();
    reader.read_to_end(&mut body).map_err(|e| Error::Format(e.to_string()))?;
    if body.len() != len * 8 {
        return Err(Error::Format(format!("expected {} bytes of entries for n = {n}, found {}", len * 8, body.len())));
    }
    let data = body.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8"))).collect();
    Ok(DenseMatrix::from_vec(n, n, data)?)
}

/// Writes `chat` in the binary matrix format for external plotting.
pub fn emit_chat_heatmap_data(chat: &DenseMatrix, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
    write_chat(chat, BufWriter::new(file)).map_err(|source| Error::Io { path: path.to_owned(), source })
}

pub fn read_chat_file(path: &Path) -> Result<DenseMatrix> {
    read_chat(BufReader::new(open(path)?))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io { path: path.to_owned(), source })
}
