use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::graph::{generate_graph_world, GeometricGraph, GraphWorldParams};
use super::grid::generate_maze;
use super::labels::{dijkstra_labels, NavSample};
use crate::error::{Error, Result};

pub const ARCHIVE_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"MPVNARC\0";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum WorldParams {
    Grid { size: usize },
    Graph(GraphWorldParams),
}

impl WorldParams {
    pub fn generate(&self, seed: u64) -> Result<NavSample> {
        let graph = match self {
            WorldParams::Grid { size } => generate_maze(*size, seed)?.to_graph(),
            WorldParams::Graph(p) => generate_graph_world(p, seed)?,
        };
        Ok(dijkstra_labels(&graph))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub split: Split,
    pub seed: u64,
    pub world: WorldParams,
    pub samples: Vec<NavSample>,
}

/// Seed of sample `index` in `split`, a pure function of the root seed.
pub fn sample_seed(root: u64, split: Split, index: usize) -> u64 {
    let mut z =
        root ^ (split as u64).wrapping_mul(0xD1B5_4A32_D192_ED03) ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn generate_dataset(world: WorldParams, split: Split, count: usize, seed: u64) -> Result<Dataset> {
    let samples = (0..count).map(|i| world.generate(sample_seed(seed, split, i))).collect::<Result<_>>()?;
    Ok(Dataset { split, seed, world, samples })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchiveMeta {
    pub format_version: u32,
    pub split: Split,
    pub seed: u64,
    pub world: WorldParams,
    pub num_samples: usize,
    pub num_nodes: usize,
    pub num_edges: usize,
}

/// The JSON sidecar written next to an archive.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

enum Column {
    F32(Vec<f32>),
    I32(Vec<i32>),
    U8(Vec<u8>),
}

struct Named {
    dims: Vec<usize>,
    data: Column,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn meta(&self) -> ArchiveMeta {
        ArchiveMeta {
            format_version: ARCHIVE_VERSION,
            split: self.split,
            seed: self.seed,
            world: self.world,
            num_samples: self.samples.len(),
            num_nodes: self.samples.iter().map(|s| s.graph.n_nodes()).sum(),
            num_edges: self.samples.iter().map(|s| 2 * s.graph.n_edges()).sum(),
        }
    }

    /// Writes the binary archive at `path` and its JSON sidecar.
    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.encode();
        fs::write(path, bytes)?;
        fs::write(sidecar_path(path), serde_json::to_vec_pretty(&self.meta())?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingData(path.to_path_buf()));
        }
        let meta: ArchiveMeta = {
            let raw: serde_json::Value = serde_json::from_slice(&fs::read(sidecar_path(path))?)?;
            let found = raw.get("format_version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
            if found != ARCHIVE_VERSION {
                return Err(Error::Version { found, expected: ARCHIVE_VERSION });
            }
            serde_json::from_value(raw)?
        };
        let arrays = decode(&fs::read(path)?)?;
        let samples = rebuild(&arrays, meta.num_samples)?;
        Ok(Self { split: meta.split, seed: meta.seed, world: meta.world, samples })
    }

    fn columns(&self) -> Vec<(&'static str, Named)> {
        let s = &self.samples;
        let n_tot: usize = s.iter().map(|x| x.graph.n_nodes()).sum();
        let f = s.first().map_or(0, |x| x.graph.features().ncols());
        let (mut node_off, mut edge_off) = (vec![0i32], vec![0i32]);
        let (mut pos, mut feat, mut lab) = (Vec::new(), Vec::new(), Vec::new());
        let (mut src, mut dst) = (Vec::new(), Vec::new());
        let (mut obst, mut reach, mut goal) = (Vec::new(), Vec::new(), Vec::new());
        for x in s {
            let g = &x.graph;
            for p in g.positions() {
                pos.extend([p[0] as f32, p[1] as f32]);
            }
            feat.extend(g.features().iter().map(|&v| v as f32));
            for l in &x.labels {
                lab.extend([l[0] as f32, l[1] as f32]);
            }
            for (i, j) in g.directed_edges() {
                src.push(i as i32);
                dst.push(j as i32);
            }
            obst.extend(g.obstacle().iter().map(|&b| u8::from(b)));
            reach.extend(x.reachable.iter().map(|&b| u8::from(b)));
            goal.push(g.goal() as i32);
            node_off.push(node_off.last().unwrap() + g.n_nodes() as i32);
            edge_off.push(src.len() as i32);
        }
        let e_tot = src.len();
        src.extend(dst);
        vec![
            ("node_offsets", Named { dims: vec![s.len() + 1], data: Column::I32(node_off) }),
            ("edge_offsets", Named { dims: vec![s.len() + 1], data: Column::I32(edge_off) }),
            ("positions", Named { dims: vec![n_tot, 2], data: Column::F32(pos) }),
            ("features", Named { dims: vec![n_tot, f], data: Column::F32(feat) }),
            ("edge_index", Named { dims: vec![2, e_tot], data: Column::I32(src) }),
            ("labels", Named { dims: vec![n_tot, 2], data: Column::F32(lab) }),
            ("obstacle_mask", Named { dims: vec![n_tot], data: Column::U8(obst) }),
            ("reachable_mask", Named { dims: vec![n_tot], data: Column::U8(reach) }),
            ("goal_index", Named { dims: vec![s.len()], data: Column::I32(goal) }),
        ]
    }

    fn encode(&self) -> Vec<u8> {
        let cols = self.columns();
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend(ARCHIVE_VERSION.to_le_bytes());
        out.extend((cols.len() as u32).to_le_bytes());
        for (name, col) in &cols {
            out.extend((name.len() as u16).to_le_bytes());
            out.extend(name.as_bytes());
            let tag = match col.data {
                Column::F32(_) => 0u8,
                Column::I32(_) => 1,
                Column::U8(_) => 2,
            };
            out.push(tag);
            out.push(col.dims.len() as u8);
            for &d in &col.dims {
                out.extend((d as u64).to_le_bytes());
            }
            match &col.data {
                Column::F32(v) => v.iter().for_each(|x| out.extend(x.to_le_bytes())),
                Column::I32(v) => v.iter().for_each(|x| out.extend(x.to_le_bytes())),
                Column::U8(v) => out.extend(v),
            }
        }
        let sum = fnv1a(&out);
        out.extend(sum.to_le_bytes());
        out
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

struct Reader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Corrupt("archive truncated".into()))?;
        let s = &self.buf[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn decode(buf: &[u8]) -> Result<BTreeMap<String, Named>> {
    if buf.len() < MAGIC.len() + 16 || &buf[..MAGIC.len()] != MAGIC {
        return Err(Error::Corrupt("not a dataset archive".into()));
    }
    let (body, tail) = buf.split_at(buf.len() - 8);
    let mut r = Reader { buf: body, at: MAGIC.len() };
    let version = r.u32()?;
    if version != ARCHIVE_VERSION {
        return Err(Error::Version { found: version, expected: ARCHIVE_VERSION });
    }
    if fnv1a(body).to_le_bytes() != tail {
        return Err(Error::Corrupt("checksum mismatch".into()));
    }
    let count = r.u32()?;
    let mut out = BTreeMap::new();
    for _ in 0..count {
        let len = r.u16()? as usize;
        let name = String::from_utf8(r.take(len)?.to_vec()).map_err(|_| Error::Corrupt("array name".into()))?;
        let tag = r.u8()?;
        let ndim = r.u8()? as usize;
        let dims = (0..ndim).map(|_| r.u64().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        let n = dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d)).ok_or_else(|| Error::Corrupt("size".into()))?;
        let data = match tag {
            0 => {
                Column::F32(r.take(n * 4)?.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect())
            }
            1 => {
                Column::I32(r.take(n * 4)?.chunks_exact(4).map(|c| i32::from_le_bytes(c.try_into().unwrap())).collect())
            }
            2 => Column::U8(r.take(n)?.to_vec()),
            t => return Err(Error::Corrupt(format!("unknown element type {t}"))),
        };
        out.insert(name, Named { dims, data });
    }
    if r.at != body.len() {
        return Err(Error::Corrupt("trailing bytes".into()));
    }
    Ok(out)
}

fn rebuild(arrays: &BTreeMap<String, Named>, expected: usize) -> Result<Vec<NavSample>> {
    fn get<'a>(a: &'a BTreeMap<String, Named>, name: &str) -> Result<&'a Named> {
        a.get(name).ok_or_else(|| Error::Corrupt(format!("missing array {name}")))
    }
    fn f32s<'a>(a: &'a BTreeMap<String, Named>, name: &str) -> Result<(&'a [f32], &'a [usize])> {
        match get(a, name)? {
            Named { dims, data: Column::F32(v) } => Ok((v, dims)),
            _ => Err(Error::Corrupt(format!("{name} has the wrong element type"))),
        }
    }
    fn i32s<'a>(a: &'a BTreeMap<String, Named>, name: &str) -> Result<&'a [i32]> {
        match get(a, name)? {
            Named { data: Column::I32(v), .. } => Ok(v),
            _ => Err(Error::Corrupt(format!("{name} has the wrong element type"))),
        }
    }
    fn u8s<'a>(a: &'a BTreeMap<String, Named>, name: &str) -> Result<&'a [u8]> {
        match get(a, name)? {
            Named { data: Column::U8(v), .. } => Ok(v),
            _ => Err(Error::Corrupt(format!("{name} has the wrong element type"))),
        }
    }
    let bad = |what: &str| Error::Corrupt(what.to_string());
    let node_off = i32s(arrays, "node_offsets")?;
    let edge_off = i32s(arrays, "edge_offsets")?;
    let (pos, _) = f32s(arrays, "positions")?;
    let (feat, fdims) = f32s(arrays, "features")?;
    let (lab, _) = f32s(arrays, "labels")?;
    let edges = i32s(arrays, "edge_index")?;
    let obst = u8s(arrays, "obstacle_mask")?;
    let reach = u8s(arrays, "reachable_mask")?;
    let goal = i32s(arrays, "goal_index")?;
    if node_off.len() != expected + 1 || edge_off.len() != expected + 1 || goal.len() != expected {
        return Err(bad("sample count disagrees with metadata"));
    }
    let f = *fdims.get(1).ok_or_else(|| bad("features"))?;
    let n_tot = *node_off.last().unwrap() as usize;
    let e_tot = *edge_off.last().unwrap() as usize;
    if pos.len() != 2 * n_tot
        || lab.len() != 2 * n_tot
        || feat.len() != f * n_tot
        || obst.len() != n_tot
        || reach.len() != n_tot
        || edges.len() != 2 * e_tot
    {
        return Err(bad("array lengths disagree"));
    }
    let (src, dst) = edges.split_at(e_tot);
    let mut out = Vec::with_capacity(expected);
    for s in 0..expected {
        let (a, b) = (node_off[s] as usize, node_off[s + 1] as usize);
        let (ea, eb) = (edge_off[s] as usize, edge_off[s + 1] as usize);
        if a > b || b > n_tot || ea > eb || eb > e_tot {
            return Err(bad("offsets"));
        }
        let n = b - a;
        let positions = (a..b).map(|i| [f64::from(pos[2 * i]), f64::from(pos[2 * i + 1])]).collect();
        let features = Array2::from_shape_fn((n, f), |(i, c)| f64::from(feat[(a + i) * f + c]));
        let mut neighbors = vec![Vec::new(); n];
        for e in ea..eb {
            let (i, j) = (src[e] as usize, dst[e] as usize);
            if i >= n || j >= n {
                return Err(bad("edge index out of range"));
            }
            neighbors[i].push(j);
        }
        neighbors.iter_mut().for_each(|l| l.sort_unstable());
        let obstacle = obst[a..b].iter().map(|&v| v != 0).collect();
        let graph = GeometricGraph::from_parts(positions, features, neighbors, obstacle, goal[s] as usize)
            .map_err(|e| Error::Corrupt(format!("sample {s}: {e}")))?;
        let labels = (a..b).map(|i| [f64::from(lab[2 * i]), f64::from(lab[2 * i + 1])]).collect();
        let reachable = reach[a..b].iter().map(|&v| v != 0).collect();
        out.push(NavSample { graph, labels, reachable });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_version() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train.mpva");
        for world in [WorldParams::Grid { size: 7 }, WorldParams::Graph(GraphWorldParams::with_nodes(40))] {
            let ds = generate_dataset(world, Split::Train, 5, 42).unwrap();
            ds.save(&path).unwrap();
            assert_eq!(Dataset::load(&path).unwrap(), ds);
        }
        let side = sidecar_path(&path);
        let text = fs::read_to_string(&side).unwrap().replace("\"format_version\": 1", "\"format_version\": 9");
        fs::write(&side, text).unwrap();
        assert!(matches!(Dataset::load(&path), Err(Error::Version { found: 9, expected: 1 })));
    }

    #[test]
    fn corruption_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.mpva");
        generate_dataset(WorldParams::Grid { size: 5 }, Split::Val, 2, 1).unwrap().save(&path).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0xff;
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(Dataset::load(&path), Err(Error::Corrupt(_))));
        fs::write(&path, &bytes[..10]).unwrap();
        assert!(matches!(Dataset::load(&path), Err(Error::Corrupt(_))));
    }

    #[test]
    fn splits_draw_different_worlds() {
        let w = WorldParams::Grid { size: 9 };
        let a = generate_dataset(w, Split::Train, 3, 0).unwrap();
        let b = generate_dataset(w, Split::Test, 3, 0).unwrap();
        assert_ne!(a.samples[0], b.samples[0]);
        assert_eq!(a, generate_dataset(w, Split::Train, 3, 0).unwrap());
    }
}
