//! File formats.
//!
//! Graphs: a header line `n m`, then `m` lines `u v` with `u < v`; blank
//! lines and `#` comments are skipped. Writers emit edges in ascending
//! order, so a graph has exactly one rendering. Any reader or writer given
//! `gzip = true` wraps the same text in a gzip stream.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use scalowork_core::codec::DecodeError;
use scalowork_core::graph::{Graph, GraphError, VertexPermutation};
use scalowork_core::mds::{CardinalityBound, DominatingSet};
use scalowork_core::protocol::{deserialize_block, serialize_block, Block};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {what}")]
    Parse { path: PathBuf, line: usize, what: String },
    #[error("{path}: {source}")]
    Graph { path: PathBuf, source: GraphError },
    #[error("{path}: {source}")]
    Decode { path: PathBuf, source: DecodeError },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.to_path_buf(), source }
}

/// True for paths ending in `.gz`.
pub fn looks_gzipped(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

pub fn open_reader(path: &Path, gzip: bool) -> Result<Box<dyn BufRead>, IoError> {
    let file = File::open(path).map_err(io_err(path))?;
    Ok(if gzip { Box::new(BufReader::new(GzDecoder::new(file))) } else { Box::new(BufReader::new(file)) })
}

pub fn write_bytes(path: &Path, bytes: &[u8], gzip: bool) -> Result<(), IoError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    if gzip {
        let mut enc = GzEncoder::new(w, Compression::default());
        enc.write_all(bytes).map_err(io_err(path))?;
        w = enc.finish().map_err(io_err(path))?;
    } else {
        w.write_all(bytes).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn render_graph(g: &Graph) -> String {
    let mut out = String::with_capacity(16 + 14 * g.m());
    let _ = writeln!(out, "{} {}", g.n(), g.m());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

/// Parses the graph text format. `origin` only labels errors.
pub fn parse_graph(reader: impl BufRead, origin: &Path) -> Result<Graph, IoError> {
    let parse = |line: usize, what: &str| IoError::Parse { path: origin.to_path_buf(), line, what: what.to_string() };
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (i, raw) in reader.lines().enumerate() {
        let raw = raw.map_err(io_err(origin))?;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(parse(i + 1, "expected two fields"));
        };
        match header {
            None => {
                let n = a.parse().map_err(|_| parse(i + 1, "vertex count"))?;
                let m = b.parse().map_err(|_| parse(i + 1, "edge count"))?;
                if n > u32::MAX as usize {
                    return Err(parse(i + 1, "vertex count exceeds u32"));
                }
                header = Some((n, m));
                edges.reserve(m.min(1 << 24));
            }
            Some((_, m)) => {
                let u: u32 = a.parse().map_err(|_| parse(i + 1, "vertex id"))?;
                let v: u32 = b.parse().map_err(|_| parse(i + 1, "vertex id"))?;
                if u >= v {
                    return Err(parse(i + 1, "edges must be written with u < v"));
                }
                if edges.len() == m {
                    return Err(parse(i + 1, "more edges than the header declares"));
                }
                edges.push((u, v));
            }
        }
    }
    let (n, m) = header.ok_or_else(|| parse(0, "missing header"))?;
    if edges.len() != m {
        return Err(parse(0, &format!("header declares {m} edges, found {}", edges.len())));
    }
    let g = Graph::from_edges(n, &edges).map_err(|source| IoError::Graph { path: origin.to_path_buf(), source })?;
    if g.m() != m {
        return Err(parse(0, "duplicate edges"));
    }
    Ok(g)
}

pub fn read_graph(path: &Path, gzip: bool) -> Result<Graph, IoError> {
    parse_graph(open_reader(path, gzip)?, path)
}

pub fn write_graph(path: &Path, g: &Graph, gzip: bool) -> Result<(), IoError> {
    write_bytes(path, render_graph(g).as_bytes(), gzip)
}

/// One line per vertex of the source graph: the label it receives.
pub fn render_permutation(p: &VertexPermutation) -> String {
    let mut out = String::new();
    for v in p.as_slice() {
        let _ = writeln!(out, "{v}");
    }
    out
}

pub fn read_permutation(path: &Path) -> Result<VertexPermutation, IoError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut mapping = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        mapping.push(line.trim().parse().map_err(|_| IoError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            what: "vertex label".into(),
        })?);
    }
    VertexPermutation::new(mapping).map_err(|source| IoError::Graph { path: path.to_path_buf(), source })
}

/// A solved instance as written by `solve`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFile {
    pub vertices: Vec<u32>,
    pub bound: f64,
    pub within_bound: bool,
    pub dominating: bool,
}

impl SolutionFile {
    pub fn new(set: &DominatingSet, bound: CardinalityBound, dominating: bool) -> Self {
        Self { vertices: set.vertices().to_vec(), bound: bound.k, within_bound: bound.admits(set.len()), dominating }
    }

    pub fn render(&self) -> String {
        let list: Vec<String> = self.vertices.iter().map(u32::to_string).collect();
        format!(
            "vertices {}\nsize {}\nbound {:.6}\nwithin_bound {}\ndominating {}\n",
            list.join(" "),
            self.vertices.len(),
            self.bound,
            self.within_bound,
            self.dominating
        )
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self, IoError> {
        let parse = |line: usize, what: &str| IoError::Parse { path: origin.to_path_buf(), line, what: what.to_string() };
        let mut out = SolutionFile { vertices: Vec::new(), bound: 0.0, within_bound: false, dominating: false };
        let mut size = None;
        for (i, line) in text.lines().enumerate() {
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            let rest = rest.trim();
            match key {
                "vertices" => {
                    out.vertices = rest
                        .split_whitespace()
                        .map(|v| v.parse().map_err(|_| parse(i + 1, "vertex id")))
                        .collect::<Result<_, _>>()?
                }
                "size" => size = Some(rest.parse::<usize>().map_err(|_| parse(i + 1, "size"))?),
                "bound" => out.bound = rest.parse().map_err(|_| parse(i + 1, "bound"))?,
                "within_bound" => out.within_bound = rest.parse().map_err(|_| parse(i + 1, "flag"))?,
                "dominating" => out.dominating = rest.parse().map_err(|_| parse(i + 1, "flag"))?,
                "" => {}
                _ => return Err(parse(i + 1, "unknown key")),
            }
        }
        if size != Some(out.vertices.len()) {
            return Err(parse(0, "size does not match the vertex list"));
        }
        Ok(out)
    }
}

pub fn read_block(path: &Path) -> Result<Block, IoError> {
    let mut raw = Vec::new();
    File::open(path).map_err(io_err(path))?.read_to_end(&mut raw).map_err(io_err(path))?;
    deserialize_block(&raw).map_err(|source| IoError::Decode { path: path.to_path_buf(), source })
}

pub fn write_block(path: &Path, block: &Block) -> Result<(), IoError> {
    write_bytes(path, &serialize_block(block), false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use scalowork_core::graph::{generate_ba, path as path_graph, star};
    use scalowork_core::mds::{compute_bound, greedy_sequential};

    fn here() -> PathBuf {
        PathBuf::from("<test>")
    }

    #[test]
    fn render_is_canonical() {
        assert_eq!(render_graph(&path_graph(3)), "3 2\n0 1\n1 2\n");
        assert_eq!(render_graph(&star(0)), "1 0\n");
    }

    #[test]
    fn parse_accepts_comments_and_round_trips() {
        let text = "# tiny\n3 2\n\n0 1\n# middle\n1 2\n";
        let g = parse_graph(text.as_bytes(), &here()).unwrap();
        assert_eq!(g, path_graph(3));
        let g = generate_ba(300, 3, 1).unwrap();
        assert_eq!(parse_graph(render_graph(&g).as_bytes(), &here()).unwrap(), g);
    }

    #[test]
    fn parse_rejects_bad_input() {
        for bad in ["", "3\n", "3 2\n0 1\n", "3 1\n1 0\n", "3 1\n0 0\n", "3 1\n0 5\n", "3 1\n0 1\n1 2\n", "3 2\n0 1\n0 1\n", "x 1\n"]
        {
            assert!(parse_graph(bad.as_bytes(), &here()).is_err(), "{bad:?}");
        }
        let err = parse_graph("3 1\n0 1 2\n".as_bytes(), &here()).unwrap_err();
        assert_eq!(err.to_string(), "<test>:2: expected two fields");
    }

    #[test]
    fn gzip_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = generate_ba(200, 2, 9).unwrap();
        let p = dir.path().join("g.txt.gz");
        assert!(looks_gzipped(&p));
        write_graph(&p, &g, true).unwrap();
        assert_eq!(read_graph(&p, true).unwrap(), g);
        assert!(read_graph(&p, false).is_err());
        assert!(matches!(read_graph(&dir.path().join("missing"), false), Err(IoError::Io { .. })));
    }

    #[test]
    fn solution_file_round_trip() {
        let g = star(5);
        let set = greedy_sequential(&g);
        let f = SolutionFile::new(&set, compute_bound(&g.properties()), true);
        let text = f.render();
        assert!(text.starts_with("vertices 0\nsize 1\nbound "));
        let back = SolutionFile::parse(&text, &here()).unwrap();
        assert_eq!((back.vertices, back.within_bound, back.dominating), (f.vertices, true, true));
        assert!((back.bound - f.bound).abs() < 1e-6);
        assert!(SolutionFile::parse("vertices 1 2\nsize 3\n", &here()).is_err());
    }

    #[test]
    fn permutation_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = VertexPermutation::new(vec![2, 0, 1]).unwrap();
        let file = dir.path().join("p");
        std::fs::write(&file, render_permutation(&p)).unwrap();
        assert_eq!(read_permutation(&file).unwrap(), p);
        std::fs::write(&file, "0\n0\n").unwrap();
        assert!(read_permutation(&file).is_err());
    }
}
