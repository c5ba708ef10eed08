//! Artery/vein ground truth: a coded label image plus a class map.
//!
//! Two vessels of the same class that do not touch are different units, so
//! each class is split into 8-connected components.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};
use std::path::Path;

use crate::error::{Error, Result};
use crate::liftspace::netpbm;
use crate::liftspace::LiftedPoint;

/// Class name → pixel codes, e.g. `{"classes": {"artery": [1], "vein": [2]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMap {
    pub classes: BTreeMap<String, Vec<u16>>,
}

impl ClassMap {
    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let map: ClassMap = serde_json::from_slice(&bytes)?;
        map.validate()?;
        Ok(map)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeMap::new();
        for (name, codes) in &self.classes {
            for &c in codes {
                if c == 0 {
                    return Err(Error::format("class map", format!("class {name:?} uses code 0 (background)")));
                }
                if let Some(prev) = seen.insert(c, name) {
                    return Err(Error::format("class map", format!("code {c} in both {prev:?} and {name:?}")));
                }
            }
        }
        Ok(())
    }

    fn class_of(&self, code: u16) -> Option<&str> {
        self.classes.iter().find(|(_, codes)| codes.contains(&code)).map(|(n, _)| n.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitMap {
    pub width: usize,
    pub height: usize,
    /// Row-major unit id per pixel; 0 where no class is annotated.
    pub units: Vec<u32>,
    pub unit_class: BTreeMap<u32, String>,
}

/// Splits each class into 8-connected components. Units are numbered from 1
/// in row-major order of their first pixel.
pub fn split_classes(codes: &[u16], width: usize, height: usize, classes: &ClassMap) -> Result<UnitMap> {
    if codes.len() != width * height {
        return Err(Error::InvalidInput(format!("{} codes for a {width}x{height} label map", codes.len())));
    }
    classes.validate()?;
    let class: Vec<Option<&str>> = codes.iter().map(|&c| if c == 0 { None } else { classes.class_of(c) }).collect();
    let mut units = vec![0u32; codes.len()];
    let mut unit_class = BTreeMap::new();
    let mut queue = VecDeque::new();
    for start in 0..codes.len() {
        let Some(name) = class[start] else { continue };
        if units[start] != 0 {
            continue;
        }
        let id = unit_class.len() as u32 + 1;
        unit_class.insert(id, name.to_string());
        units[start] = id;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i % width) as i64, (i / width) as i64);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= width as i64 || ny >= height as i64 {
                        continue;
                    }
                    let j = ny as usize * width + nx as usize;
                    if units[j] == 0 && class[j] == Some(name) {
                        units[j] = id;
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    Ok(UnitMap { width, height, units, unit_class })
}

impl UnitMap {
    /// Reads a P5 label image of class codes and its class map.
    pub fn read(labels: &Path, classes: &Path) -> Result<Self> {
        let pnm = netpbm::read(labels)?;
        if pnm.channels != 1 {
            return Err(Error::format("label map", format!("{}: expected a single-channel image", labels.display())));
        }
        split_classes(&pnm.samples, pnm.width, pnm.height, &ClassMap::read(classes)?)
    }

    /// Ground-truth unit sets for lifted points; unannotated pixels give an empty set.
    pub fn labels_for(&self, points: &[LiftedPoint]) -> Result<Vec<Vec<u32>>> {
        points
            .iter()
            .map(|p| {
                let (x, y) = (p.x as usize, p.y as usize);
                if x >= self.width || y >= self.height {
                    return Err(Error::InvalidInput(format!("point ({x}, {y}) outside the label map")));
                }
                let u = self.units[y * self.width + x];
                Ok(if u == 0 { Vec::new() } else { vec![u] })
            })
            .collect()
    }
}
