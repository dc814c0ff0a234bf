//! GMSH `.msh` 4.1 ASCII reader.
//!
//! Parses the `$PhysicalNames`, `$Entities`, `$Nodes` and `$Elements`
//! sections, renumbers the (possibly sparse) node ids densely, and extracts
//! the tetrahedron/boundary-triangle connectivity tables for a requested
//! polynomial degree. Other sections are skipped. Node and element indices
//! are stored zero-based internally; file output and diagnostics are
//! one-based.

use crate::element::CellKind;
use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Element type codes of order-1..4 tetrahedra.
pub const TET_CODES: [i32; 4] = [4, 11, 29, 30];
/// Element type codes of order-1..4 triangles.
pub const TRI_CODES: [i32; 4] = [2, 9, 21, 23];

/// Nodes per element for the accepted type codes.
pub fn element_node_count(code: i32) -> Option<usize> {
    match code {
        15 => Some(1),
        1 => Some(2),
        2 => Some(3),
        9 => Some(6),
        21 => Some(10),
        23 => Some(15),
        4 => Some(4),
        11 => Some(10),
        29 => Some(20),
        30 => Some(35),
        _ => None,
    }
}

fn code_order(code: i32, family: &[i32; 4]) -> Option<usize> {
    family.iter().position(|&c| c == code).map(|p| p + 1)
}

#[derive(Debug, Clone)]
pub struct PhysicalGroup {
    pub dim: u8,
    pub tag: i32,
    pub name: String,
}

#[derive(Debug, Clone)]
pub struct EntityRecord {
    pub dim: u8,
    pub tag: i32,
    pub bbox_min: [f64; 3],
    pub bbox_max: [f64; 3],
    pub physical_tags: Vec<i32>,
    /// Signed tags of the bounding lower-dimensional entities.
    pub bounding_entities: Vec<i32>,
}

#[derive(Debug, Clone)]
pub struct NodeBlock {
    pub dim: u8,
    pub entity_tag: i32,
    pub ids: Vec<u64>,
    pub coords: Vec<[f64; 3]>,
}

#[derive(Debug, Clone)]
pub struct ElementBlock {
    pub dim: u8,
    pub entity_tag: i32,
    pub type_code: i32,
    pub ids: Vec<u64>,
    pub node_rows: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedMesh {
    pub groups: Vec<PhysicalGroup>,
    /// Entity records indexed by dimension 0..=3.
    pub entities: [Vec<EntityRecord>; 4],
    pub node_blocks: Vec<NodeBlock>,
    pub element_blocks: Vec<ElementBlock>,
}

/// Element-to-node index table with a fixed number of local nodes per row.
#[derive(Debug, Clone)]
pub struct ElementTable {
    n_local: usize,
    data: Vec<usize>,
}

impl ElementTable {
    pub fn new(n_local: usize) -> Self {
        ElementTable {
            n_local,
            data: Vec::new(),
        }
    }

    pub fn n_local(&self) -> usize {
        self.n_local
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.n_local).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.data[i * self.n_local..(i + 1) * self.n_local]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[usize]> {
        self.data.chunks_exact(self.n_local.max(1))
    }

    pub fn push_row(&mut self, row: &[usize]) {
        debug_assert_eq!(row.len(), self.n_local);
        self.data.extend_from_slice(row);
    }
}

/// Extracted FEM mesh: dense node coordinates, order-m connectivity of the
/// tetrahedra and boundary triangles, owning entity tags, and the physical
/// group to entity-tag map.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub coords: Vec<[f64; 3]>,
    /// nTtrh x dofK node indices, rows in file order of appearance.
    pub tets: ElementTable,
    /// ntrB x dofA node indices, rows in file order of appearance.
    pub tris: ElementTable,
    /// 3D entity tag owning each tetrahedron.
    pub tet_entity: Vec<i32>,
    /// 2D entity tag owning each boundary triangle.
    pub tri_entity: Vec<i32>,
    pub degree: usize,
    /// Physical group name to the tags of the entities carrying it.
    pub groups: BTreeMap<String, Vec<i32>>,
    /// Dimension of each physical group.
    pub group_dims: BTreeMap<String, u8>,
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn n_tets(&self) -> usize {
        self.tets.len()
    }

    pub fn n_boundary_tris(&self) -> usize {
        self.tris.len()
    }

    /// Coordinates of the four vertices of tetrahedron `k`.
    pub fn tet_vertices(&self, k: usize) -> [[f64; 3]; 4] {
        let row = self.tets.row(k);
        [
            self.coords[row[0]],
            self.coords[row[1]],
            self.coords[row[2]],
            self.coords[row[3]],
        ]
    }

    /// Coordinates of the three vertices of boundary triangle `k`.
    pub fn tri_vertices(&self, k: usize) -> [[f64; 3]; 3] {
        let row = self.tris.row(k);
        [
            self.coords[row[0]],
            self.coords[row[1]],
            self.coords[row[2]],
        ]
    }
}

/// Cap pre-allocation by untrusted header counts; pushes still grow as
/// needed, and a short section fails the count check instead of aborting
/// on an absurd reservation.
fn capped(n: usize) -> usize {
    n.min(1 << 20)
}

fn malformed(section: &str, detail: impl Into<String>) -> Error {
    Error::MalformedSection {
        section: section.to_string(),
        detail: detail.into(),
    }
}

/// Whitespace token cursor over one section body.
struct Tokens<'a> {
    section: &'a str,
    iter: std::str::SplitWhitespace<'a>,
}

impl<'a> Tokens<'a> {
    fn new(section: &'a str, body: &'a str) -> Self {
        Tokens {
            section,
            iter: body.split_whitespace(),
        }
    }

    fn next(&mut self) -> Result<&'a str> {
        self.iter
            .next()
            .ok_or_else(|| malformed(self.section, "premature end of section"))
    }

    fn int(&mut self) -> Result<i64> {
        let t = self.next()?;
        t.parse()
            .map_err(|_| malformed(self.section, format!("expected integer, found \"{t}\"")))
    }

    fn uint(&mut self) -> Result<u64> {
        let t = self.next()?;
        t.parse()
            .map_err(|_| malformed(self.section, format!("expected count, found \"{t}\"")))
    }

    fn real(&mut self) -> Result<f64> {
        let t = self.next()?;
        t.parse()
            .map_err(|_| malformed(self.section, format!("expected number, found \"{t}\"")))
    }

    fn finish(mut self) -> Result<()> {
        match self.iter.next() {
            None => Ok(()),
            Some(t) => Err(malformed(self.section, format!("trailing data \"{t}\""))),
        }
    }
}

/// Parse a GMSH 4.1 ASCII mesh file.
pub fn parse_msh(text: &str) -> Result<ParsedMesh> {
    let sections = split_sections(text)?;
    let format = sections
        .iter()
        .find(|(name, _)| name == "MeshFormat")
        .ok_or_else(|| malformed("MeshFormat", "section missing"))?;
    parse_format(&format.1)?;

    let mut parsed = ParsedMesh::default();
    let mut saw_entities = false;
    let mut saw_nodes = false;
    let mut saw_elements = false;
    for (name, body) in &sections {
        match name.as_str() {
            "PhysicalNames" => parsed.groups = parse_physical_names(body)?,
            "Entities" => {
                parsed.entities = parse_entities(body)?;
                saw_entities = true;
            }
            "Nodes" => {
                parsed.node_blocks = parse_nodes(body)?;
                saw_nodes = true;
            }
            "Elements" => {
                parsed.element_blocks = parse_elements(body)?;
                saw_elements = true;
            }
            _ => {} // MeshFormat handled above; unknown sections skipped
        }
    }
    if !saw_entities {
        return Err(malformed("Entities", "section missing"));
    }
    if !saw_nodes {
        return Err(malformed("Nodes", "section missing"));
    }
    if !saw_elements {
        return Err(malformed("Elements", "section missing"));
    }
    Ok(parsed)
}

fn split_sections(text: &str) -> Result<Vec<(String, String)>> {
    let mut sections = Vec::new();
    let mut current: Option<(String, String)> = None;
    for line in text.lines() {
        let trimmed = line.trim();
        if let Some(rest) = trimmed.strip_prefix('$') {
            match &mut current {
                None => {
                    if rest.starts_with("End") {
                        return Err(malformed(rest, "end marker without a section"));
                    }
                    current = Some((rest.to_string(), String::new()));
                }
                Some((name, body)) => {
                    if rest == format!("End{name}") {
                        sections.push((name.clone(), std::mem::take(body)));
                        current = None;
                    } else {
                        return Err(malformed(name, format!("unexpected marker ${rest}")));
                    }
                }
            }
        } else if let Some((_, body)) = &mut current {
            body.push_str(line);
            body.push('\n');
        }
    }
    if let Some((name, _)) = current {
        return Err(malformed(&name, "missing end marker"));
    }
    Ok(sections)
}

fn parse_format(body: &str) -> Result<()> {
    let mut t = Tokens::new("MeshFormat", body);
    let version = t.next()?;
    if version != "4.1" {
        return Err(Error::UnsupportedVersion(version.to_string()));
    }
    let file_type = t.int()?;
    if file_type != 0 {
        return Err(Error::BinaryNotSupported);
    }
    let _data_size = t.int()?;
    Ok(())
}

fn parse_physical_names(body: &str) -> Result<Vec<PhysicalGroup>> {
    // line-based: names are quoted and may contain spaces
    let mut lines = body.lines().filter(|l| !l.trim().is_empty());
    let count: usize = lines
        .next()
        .ok_or_else(|| malformed("PhysicalNames", "missing count"))?
        .trim()
        .parse()
        .map_err(|_| malformed("PhysicalNames", "bad count"))?;
    let mut groups = Vec::with_capacity(capped(count));
    for _ in 0..count {
        let line = lines
            .next()
            .ok_or_else(|| malformed("PhysicalNames", "premature end of section"))?;
        let mut parts = line.trim().splitn(3, char::is_whitespace);
        let dim: u8 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed("PhysicalNames", "bad group dimension"))?;
        let tag: i32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed("PhysicalNames", "bad group tag"))?;
        let raw = parts.next().unwrap_or("").trim();
        let name = raw.trim_matches('"').to_string();
        if dim > 3 {
            return Err(malformed(
                "PhysicalNames",
                format!("group dimension {dim} out of range"),
            ));
        }
        if tag <= 0 {
            return Err(malformed(
                "PhysicalNames",
                format!("group tag {tag} not positive"),
            ));
        }
        if name.is_empty() {
            return Err(malformed("PhysicalNames", "empty group name"));
        }
        if groups.iter().any(|g: &PhysicalGroup| g.tag == tag) {
            return Err(malformed(
                "PhysicalNames",
                format!("duplicate group tag {tag}"),
            ));
        }
        groups.push(PhysicalGroup { dim, tag, name });
    }
    if lines.next().is_some() {
        return Err(malformed("PhysicalNames", "trailing data"));
    }
    Ok(groups)
}

fn parse_entities(body: &str) -> Result<[Vec<EntityRecord>; 4]> {
    let mut t = Tokens::new("Entities", body);
    let counts = [t.uint()?, t.uint()?, t.uint()?, t.uint()?];
    let mut out: [Vec<EntityRecord>; 4] = Default::default();
    for dim in 0..4usize {
        for _ in 0..counts[dim] {
            let tag = t.int()? as i32;
            if tag <= 0 {
                return Err(malformed(
                    "Entities",
                    format!("entity tag {tag} not positive"),
                ));
            }
            let (bbox_min, bbox_max) = if dim == 0 {
                let p = [t.real()?, t.real()?, t.real()?];
                (p, p)
            } else {
                (
                    [t.real()?, t.real()?, t.real()?],
                    [t.real()?, t.real()?, t.real()?],
                )
            };
            let n_phys = t.uint()? as usize;
            let mut physical_tags = Vec::with_capacity(capped(n_phys));
            for _ in 0..n_phys {
                physical_tags.push(t.int()? as i32);
            }
            let bounding_entities = if dim == 0 {
                Vec::new()
            } else {
                let n_bound = t.uint()? as usize;
                let mut b = Vec::with_capacity(capped(n_bound));
                for _ in 0..n_bound {
                    b.push(t.int()? as i32);
                }
                b
            };
            out[dim].push(EntityRecord {
                dim: dim as u8,
                tag,
                bbox_min,
                bbox_max,
                physical_tags,
                bounding_entities,
            });
        }
    }
    t.finish()?;
    Ok(out)
}

fn parse_nodes(body: &str) -> Result<Vec<NodeBlock>> {
    let mut t = Tokens::new("Nodes", body);
    let num_blocks = t.uint()? as usize;
    let num_nodes = t.uint()?;
    let _min_id = t.uint()?;
    let _max_id = t.uint()?;
    let mut blocks = Vec::with_capacity(capped(num_blocks));
    let mut total = 0u64;
    for _ in 0..num_blocks {
        let dim = t.int()? as u8;
        let entity_tag = t.int()? as i32;
        let parametric = t.int()?;
        if parametric != 0 {
            return Err(malformed(
                "Nodes",
                "parametric node blocks are not supported",
            ));
        }
        let n = t.uint()? as usize;
        let mut ids = Vec::with_capacity(capped(n));
        for _ in 0..n {
            ids.push(t.uint()?);
        }
        let mut coords = Vec::with_capacity(capped(n));
        for _ in 0..n {
            coords.push([t.real()?, t.real()?, t.real()?]);
        }
        total += n as u64;
        blocks.push(NodeBlock {
            dim,
            entity_tag,
            ids,
            coords,
        });
    }
    if total != num_nodes {
        return Err(malformed(
            "Nodes",
            format!("header declares {num_nodes} nodes, blocks carry {total}"),
        ));
    }
    t.finish()?;
    Ok(blocks)
}

fn parse_elements(body: &str) -> Result<Vec<ElementBlock>> {
    let mut t = Tokens::new("Elements", body);
    let num_blocks = t.uint()? as usize;
    let num_elements = t.uint()?;
    let _min_id = t.uint()?;
    let _max_id = t.uint()?;
    let mut blocks = Vec::with_capacity(capped(num_blocks));
    let mut total = 0u64;
    for _ in 0..num_blocks {
        let dim = t.int()? as u8;
        let entity_tag = t.int()? as i32;
        let type_code = t.int()? as i32;
        let n = t.uint()? as usize;
        let n_local =
            element_node_count(type_code).ok_or(Error::UnsupportedElementType(type_code))?;
        let mut ids = Vec::with_capacity(capped(n));
        let mut node_rows = Vec::with_capacity(capped(n));
        for _ in 0..n {
            ids.push(t.uint()?);
            let mut row = Vec::with_capacity(n_local);
            for _ in 0..n_local {
                row.push(t.uint()?);
            }
            node_rows.push(row);
        }
        total += n as u64;
        blocks.push(ElementBlock {
            dim,
            entity_tag,
            type_code,
            ids,
            node_rows,
        });
    }
    if total != num_elements {
        return Err(malformed(
            "Elements",
            format!("header declares {num_elements} elements, blocks carry {total}"),
        ));
    }
    t.finish()?;
    Ok(blocks)
}

/// Old node id to zero-based dense index.
pub type NodeIdMap = BTreeMap<u64, usize>;

/// Dense renumbering of the (possibly sparse) node ids, monotone in the
/// original ids. Returns the id map and the coordinate matrix in dense
/// order.
pub fn renumber_nodes(parsed: &ParsedMesh) -> Result<(NodeIdMap, Vec<[f64; 3]>)> {
    let mut by_id: BTreeMap<u64, [f64; 3]> = BTreeMap::new();
    for block in &parsed.node_blocks {
        for (id, xyz) in block.ids.iter().zip(&block.coords) {
            if by_id.insert(*id, *xyz).is_some() {
                return Err(Error::DuplicateNodeId(*id));
            }
        }
    }
    let mut map = BTreeMap::new();
    let mut coords = Vec::with_capacity(by_id.len());
    for (k, (id, xyz)) in by_id.into_iter().enumerate() {
        map.insert(id, k);
        coords.push(xyz);
    }
    Ok((map, coords))
}

/// Extract the order-m FEM mesh. All 3D element blocks must carry the
/// order-m tetrahedron type code and all 2D blocks the order-m triangle
/// code; points and lines are parsed but dropped.
pub fn extract_mesh(parsed: &ParsedMesh, m: usize) -> Result<Mesh> {
    if !(1..=4).contains(&m) {
        return Err(Error::UnsupportedDegree(m));
    }
    let (id_map, coords) = renumber_nodes(parsed)?;

    let mut tet_code: Option<i32> = None;
    let mut tri_code: Option<i32> = None;
    for block in &parsed.element_blocks {
        let slot = match block.dim {
            3 => &mut tet_code,
            2 => &mut tri_code,
            _ => continue,
        };
        match slot {
            None => *slot = Some(block.type_code),
            Some(code) if *code != block.type_code => {
                return Err(Error::MixedDegrees(*code, block.type_code))
            }
            _ => {}
        }
    }
    if let (Some(tc), Some(rc)) = (tet_code, tri_code) {
        let to = code_order(tc, &TET_CODES).ok_or(Error::UnsupportedElementType(tc))?;
        let ro = code_order(rc, &TRI_CODES).ok_or(Error::UnsupportedElementType(rc))?;
        if to != ro {
            return Err(Error::MixedDegrees(tc, rc));
        }
    }
    if let Some(tc) = tet_code {
        if code_order(tc, &TET_CODES) != Some(m) {
            return Err(Error::DegreeMismatch {
                code: tc,
                degree: m,
            });
        }
    }
    if let Some(rc) = tri_code {
        if code_order(rc, &TRI_CODES) != Some(m) {
            return Err(Error::DegreeMismatch {
                code: rc,
                degree: m,
            });
        }
    }

    let dof_k = CellKind::Tetrahedron.dof(m);
    let dof_a = CellKind::Triangle.dof(m);
    let mut tets = ElementTable::new(dof_k);
    let mut tris = ElementTable::new(dof_a);
    let mut tet_entity = Vec::new();
    let mut tri_entity = Vec::new();
    let mut row = Vec::new();
    for block in &parsed.element_blocks {
        if block.dim != 2 && block.dim != 3 {
            continue;
        }
        for nodes in &block.node_rows {
            row.clear();
            for id in nodes {
                let dense = id_map.get(id).copied().ok_or_else(|| {
                    malformed(
                        "Elements",
                        format!("element references unknown node id {id}"),
                    )
                })?;
                row.push(dense);
            }
            if block.dim == 3 {
                tets.push_row(&row);
                tet_entity.push(block.entity_tag);
            } else {
                tris.push_row(&row);
                tri_entity.push(block.entity_tag);
            }
        }
    }

    let mut groups = BTreeMap::new();
    let mut group_dims = BTreeMap::new();
    for g in &parsed.groups {
        let mut tags: Vec<i32> = parsed.entities[g.dim as usize]
            .iter()
            .filter(|e| e.physical_tags.contains(&g.tag))
            .map(|e| e.tag)
            .collect();
        tags.sort_unstable();
        groups.insert(g.name.clone(), tags);
        group_dims.insert(g.name.clone(), g.dim);
    }

    Ok(Mesh {
        coords,
        tets,
        tris,
        tet_entity,
        tri_entity,
        degree: m,
        groups,
        group_dims,
    })
}

/// Parse and extract in one step.
pub fn read_mesh(text: &str, m: usize) -> Result<Mesh> {
    let parsed = parse_msh(text)?;
    extract_mesh(&parsed, m)
}
