use std::collections::BTreeMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::weighted_cost;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub calls: u64,
    pub input_tokens: u64,
    pub output_tokens: u64,
}

impl Usage {
    pub fn weighted(&self) -> f64 {
        weighted_cost(self.input_tokens as f64, self.output_tokens as f64)
    }

    fn add(&mut self, other: &Usage) {
        self.calls += other.calls;
        self.input_tokens += other.input_tokens;
        self.output_tokens += other.output_tokens;
    }
}

/// Per-agent token totals. Internally synchronized; totals only grow.
#[derive(Debug, Default)]
pub struct UsageLedger {
    per_agent: Mutex<BTreeMap<String, Usage>>,
}

impl UsageLedger {
    pub fn record(&self, agent: &str, input_tokens: u64, output_tokens: u64) {
        let mut map = self.per_agent.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(agent.to_string()).or_default().add(&Usage {
            calls: 1,
            input_tokens,
            output_tokens,
        });
    }

    pub fn per_agent(&self) -> BTreeMap<String, Usage> {
        self.per_agent.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn total(&self) -> Usage {
        let map = self.per_agent.lock().unwrap_or_else(|e| e.into_inner());
        let mut total = Usage::default();
        for u in map.values() {
            total.add(u);
        }
        total
    }

    pub fn snapshot(&self) -> LedgerSnapshot {
        LedgerSnapshot {
            per_agent: self.per_agent(),
            total: self.total(),
        }
    }
}

/// Serializable copy of a ledger.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerSnapshot {
    pub per_agent: BTreeMap<String, Usage>,
    pub total: Usage,
}
