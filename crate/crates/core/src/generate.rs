//! Seeded random instances.

use std::collections::BTreeSet;

use crate::engine::SolverRng;
use crate::model::{Block, InstanceData, ReliefOpportunity, Rules};

const LOCATIONS: [&str; 5] = ["DEPOT", "NORTH", "EAST", "SOUTH", "WEST"];
const MAX_BLOCK_DRAWS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub name: String,
    pub n_blocks: usize,
    /// Inclusive range of relief opportunities per block.
    pub ros_per_block: (usize, usize),
    /// Inclusive minute range the relief opportunities are drawn from.
    pub span: (u32, u32),
    pub rules: Rules,
}

impl GeneratorConfig {
    /// Two short blocks; small enough for the exact oracle.
    pub fn tiny(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            n_blocks: 2,
            ros_per_block: (3, 4),
            span: (360, 840),
            rules: Rules {
                min_work_time: 90,
                max_work_time: 360,
                min_ratio: 60,
                max_ratio: 100,
                max_spells: 4,
                max_spreadover: 480,
                min_break_between_spells: 30,
                signon_allowance: 0,
                signoff_allowance: 0,
            },
        }
    }

    /// Twenty blocks across the service day.
    pub fn medium(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            n_blocks: 20,
            ros_per_block: (6, 10),
            span: (300, 1380),
            rules: Rules::default(),
        }
    }

    fn check(&self) -> Result<(), String> {
        let (lo, hi) = self.ros_per_block;
        if self.n_blocks == 0 || lo < 2 || lo > hi {
            return Err("need at least one block and 2 <= ros_min <= ros_max".into());
        }
        if self.span.1 <= self.span.0 || (self.span.1 - self.span.0) as usize + 1 < hi {
            return Err("span too short for the requested relief opportunities".into());
        }
        Ok(())
    }
}

/// Draws an instance. Each block's relief times are distinct sorted minutes
/// in the span; blocks with a piece longer than the maximum work time are
/// redrawn so every piece fits in some spell.
pub fn generate(config: &GeneratorConfig, seed: u64) -> Result<InstanceData, String> {
    config.check()?;
    let mut rng = SolverRng::new(seed);
    let (lo, hi) = config.ros_per_block;
    let (start, end) = config.span;
    let width = (end - start + 1) as usize;
    let mut blocks = Vec::with_capacity(config.n_blocks);
    for b in 0..config.n_blocks {
        let count = lo + rng.below(hi - lo + 1);
        let mut draws = 0;
        let times = loop {
            draws += 1;
            if draws > MAX_BLOCK_DRAWS {
                return Err(format!(
                    "could not draw block {b} with pieces under {} minutes",
                    config.rules.max_work_time
                ));
            }
            let mut set = BTreeSet::new();
            while set.len() < count {
                set.insert(start + rng.below(width) as u32);
            }
            let times: Vec<u32> = set.into_iter().collect();
            if times
                .windows(2)
                .all(|w| w[1] - w[0] <= config.rules.max_work_time)
            {
                break times;
            }
        };
        blocks.push(Block {
            id: format!("B{:02}", b + 1),
            relief_opportunities: times
                .into_iter()
                .map(|time_min| ReliefOpportunity {
                    time_min,
                    location: LOCATIONS[rng.below(LOCATIONS.len())].to_string(),
                })
                .collect(),
        });
    }
    Ok(InstanceData {
        name: config.name.clone(),
        rules: config.rules,
        blocks,
    })
}
