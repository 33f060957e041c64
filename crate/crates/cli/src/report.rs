//! JSON reports: `{command, result, stats: {lp_solved, wall_ms}, warnings}`.

use std::time::Instant;

use serde_json::{json, Value};

pub struct Report {
    command: &'static str,
    started: Instant,
    pub warnings: Vec<String>,
    pub lp_solved: usize,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Report {
            command,
            started: Instant::now(),
            warnings: Vec::new(),
            lp_solved: 0,
        }
    }

    pub fn finish(&self, result: Value) -> Value {
        json!({
            "command": self.command,
            "result": result,
            "stats": {
                "lp_solved": self.lp_solved,
                "wall_ms": self.started.elapsed().as_millis() as u64,
            },
            "warnings": self.warnings,
        })
    }

    pub fn print(&self, result: Value) {
        let v = self.finish(result);
        println!("{}", serde_json::to_string_pretty(&v).expect("JSON values serialize"));
    }
}
