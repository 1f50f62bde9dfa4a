//! Merging of elements into polytopal virtual elements.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::mesh::{element_geometry, Element, Mesh, TAU_GEOM};
use crate::quality::{classify, QualityThresholds};

/// Provenance: entry k lists the old element ids forming new element k.
pub type Mapping = Vec<Vec<usize>>;

fn facet_keys(el: &Element) -> Vec<Vec<usize>> {
    match el {
        Element::Polygon(l) => (0..l.len())
            .map(|i| {
                let mut k = vec![l[i], l[(i + 1) % l.len()]];
                k.sort_unstable();
                k
            })
            .collect(),
        Element::Polyhedron { faces, .. } => faces
            .iter()
            .map(|f| {
                let mut k = f.to_vec();
                k.sort_unstable();
                k
            })
            .collect(),
    }
}

fn check_connected(mesh: &Mesh, group: &[usize]) -> Result<()> {
    let keys: Vec<Vec<Vec<usize>>> = group
        .iter()
        .map(|&e| facet_keys(&mesh.elements[e]))
        .collect();
    let mut seen = vec![false; group.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..group.len() {
            if !seen[j] && keys[i].iter().any(|k| keys[j].contains(k)) {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    if seen.iter().all(|&s| s) {
        Ok(())
    } else {
        Err(Error::Invalid(format!(
            "group {group:?} is not facet-connected"
        )))
    }
}

fn merge_polyhedra(mesh: &Mesh, group: &[usize]) -> Result<Element> {
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let mut count: HashMap<Vec<usize>, usize> = HashMap::new();
    for &e in group {
        for f in mesh.elements[e].faces().unwrap() {
            let mut k = f.to_vec();
            k.sort_unstable();
            *count.entry(k).or_insert(0) += 1;
            faces.push(*f);
        }
    }
    if count.values().any(|&c| c > 2) {
        return Err(Error::Invalid(format!(
            "group {group:?} has a face shared more than twice"
        )));
    }
    faces.retain(|f| {
        let mut k = f.to_vec();
        k.sort_unstable();
        count[&k] == 1
    });
    Ok(Element::polyhedron(faces))
}

fn merge_polygons(mesh: &Mesh, group: &[usize]) -> Result<Element> {
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for &e in group {
        if let Element::Polygon(l) = &mesh.elements[e] {
            for i in 0..l.len() {
                edges.push((l[i], l[(i + 1) % l.len()]));
            }
        }
    }
    let set: BTreeSet<(usize, usize)> = edges.iter().copied().collect();
    edges.retain(|&(a, b)| !set.contains(&(b, a)));
    let start = edges[0];
    let mut lp = vec![start.0];
    let mut cur = start.1;
    let mut used = 1;
    while cur != start.0 {
        let next: Vec<&(usize, usize)> = edges.iter().filter(|e| e.0 == cur).collect();
        if next.len() != 1 {
            return Err(Error::Invalid(format!(
                "merged region of {group:?} is not bounded by a single simple loop"
            )));
        }
        lp.push(cur);
        cur = next[0].1;
        used += 1;
        if used > edges.len() {
            break;
        }
    }
    if used != edges.len() {
        return Err(Error::Invalid(format!(
            "merged region of {group:?} has holes"
        )));
    }
    Ok(Element::Polygon(lp))
}

/// Merges disjoint groups of elements; elements outside every group are kept.
/// New elements are ordered by the smallest old id they contain.
pub fn merge_groups(mesh: &Mesh, groups: &[Vec<usize>]) -> Result<(Mesh, Mapping)> {
    let n = mesh.elements.len();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for (gi, g) in groups.iter().enumerate() {
        if g.is_empty() {
            return Err(Error::Invalid("empty merge group".into()));
        }
        for &e in g {
            if e >= n {
                return Err(Error::Invalid(format!("element {e} out of range")));
            }
            if owner[e].is_some() {
                return Err(Error::Invalid(format!("element {e} appears in two groups")));
            }
            owner[e] = Some(gi);
        }
    }
    let mut elements = Vec::new();
    let mut mapping = Vec::new();
    for e in 0..n {
        match owner[e] {
            None => {
                elements.push(mesh.elements[e].clone());
                mapping.push(vec![e]);
            }
            Some(gi) => {
                let mut g = groups[gi].clone();
                g.sort_unstable();
                if g[0] != e {
                    continue;
                }
                if g.len() == 1 {
                    elements.push(mesh.elements[e].clone());
                    mapping.push(g);
                    continue;
                }
                check_connected(mesh, &g)?;
                let el = if mesh.dimension == 3 {
                    merge_polyhedra(mesh, &g)?
                } else {
                    merge_polygons(mesh, &g)?
                };
                elements.push(el);
                mapping.push(g);
            }
        }
    }
    let out = Mesh {
        dimension: mesh.dimension,
        vertices: mesh.vertices.clone(),
        elements,
        material: mesh.material,
    };
    for (k, g) in mapping.iter().enumerate() {
        if g.len() > 1 {
            let geo = element_geometry(&out, k)?;
            if geo.volume < TAU_GEOM * geo.diameter.powi(out.dimension as i32) {
                return Err(Error::Invalid(format!(
                    "merge of {g:?} has vanishing volume"
                )));
            }
        }
    }
    out.validate()?;
    Ok((out, mapping))
}

/// Merges one group of elements.
pub fn merge(mesh: &Mesh, group: &[usize]) -> Result<Mesh> {
    Ok(merge_groups(mesh, &[group.to_vec()])?.0)
}

/// Automatic agglomeration policy.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Strategy {
    /// Merge with the neighbor sharing the largest facet area, repeating until
    /// the merged volume reaches theta_vol * h^d.
    #[default]
    LargestSharedFace,
}

/// Outcome of automatic agglomeration.
#[derive(Debug, Clone)]
pub struct AutoResult {
    pub mesh: Mesh,
    pub mapping: Mapping,
    /// Bad elements (old ids) that had no neighbor to merge with.
    pub unmerged: Vec<usize>,
}

/// Merges every non-good element with neighbors per `strategy`.
pub fn auto_agglomerate(
    mesh: &Mesh,
    th: &QualityThresholds,
    strategy: Strategy,
) -> Result<AutoResult> {
    let Strategy::LargestSharedFace = strategy;
    let n = mesh.elements.len();
    let mut bad = Vec::new();
    for e in 0..n {
        if classify(mesh, e, th)?.class.is_bad() {
            bad.push(e);
        }
    }
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut unmerged = Vec::new();
    let neighbors: Vec<Vec<(usize, f64)>> = (0..n).map(|e| mesh.neighbors(e)).collect();
    for &e in &bad {
        if owner[e].is_some() {
            continue;
        }
        let gi = groups.len();
        groups.push(vec![e]);
        owner[e] = Some(gi);
        loop {
            let mut shared: HashMap<usize, f64> = HashMap::new();
            for &m in &groups[gi] {
                for &(o, a) in &neighbors[m] {
                    if owner[o] != Some(gi) {
                        *shared.entry(o).or_insert(0.0) += a;
                    }
                }
            }
            let best = shared
                .into_iter()
                .filter(|(o, _)| owner[*o].is_none())
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
            let Some((o, _)) = best else {
                if groups[gi].len() == 1 {
                    unmerged.push(e);
                }
                break;
            };
            groups[gi].push(o);
            owner[o] = Some(gi);
            let (trial, _) = merge_groups(mesh, &[groups[gi].clone()])?;
            let k = *groups[gi].iter().min().unwrap();
            let g = element_geometry(&trial, k)?;
            if g.volume >= th.theta_vol * g.diameter.powi(mesh.dimension as i32) {
                break;
            }
        }
    }
    groups.retain(|g| g.len() > 1);
    let (out, mapping) = merge_groups(mesh, &groups)?;
    Ok(AutoResult {
        mesh: out,
        mapping,
        unmerged,
    })
}

/// CSV with header new_element_id,old_element_ids.
pub fn mapping_csv(mapping: &Mapping) -> String {
    let mut s = String::from("new_element_id,old_element_ids\n");
    for (k, g) in mapping.iter().enumerate() {
        let ids: Vec<String> = g.iter().map(ToString::to_string).collect();
        let _ = writeln!(s, "{k},\"{}\"", ids.join(","));
    }
    s
}

/// Parses merge groups, one group per line as comma- or space-separated ids.
pub fn parse_groups(text: &str) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let g: std::result::Result<Vec<usize>, _> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect();
        let g = g.map_err(|_| Error::Parse(format!("groups line {}: bad element id", ln + 1)))?;
        out.push(g);
    }
    Ok(out)
}
