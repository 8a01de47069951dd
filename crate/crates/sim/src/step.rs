//! One atomic step: heap accesses and ghost commands on a working copy of
//! the shared state, with a snapshot after every ghost command.

use flowcore::heap::{AbstractError, GhostError, MemoryError, SyncError};
use flowcore::{
    abstract_region, fg_decompose, ghost_mark, ghost_sync, ghost_unmark, interface_of, Addr, FlowDomain, GoodCondition,
    HeapValue, LabelDomain, NodeLabel, Record, State,
};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepError {
    #[error("memory safety: {0}")]
    Memory(#[from] MemoryError),
    #[error("sync over {region}: {err}")]
    Sync { region: String, err: SyncError },
    #[error("ghost command: {0}")]
    Ghost(#[from] GhostError),
    #[error("abstraction: {0}")]
    Abstract(#[from] AbstractError),
    #[error("unexpected heap contents: {0}")]
    Shape(String),
}

impl StepError {
    /// Short category used in verdicts.
    pub fn kind(&self) -> &'static str {
        match self {
            StepError::Memory(_) => "memory",
            StepError::Sync { err: SyncError::Extension, .. } => "extension",
            StepError::Sync { err: SyncError::Good(_), .. } => "gamma",
            StepError::Sync { .. } => "sync",
            StepError::Ghost(_) => "ghost",
            StepError::Abstract(_) => "abstraction",
            StepError::Shape(_) => "shape",
        }
    }
}

pub struct Env<'a> {
    pub gamma: &'a dyn GoodCondition,
    pub d: &'a FlowDomain,
    pub a: &'a LabelDomain,
}

pub struct Tx<'a> {
    pub s: State,
    snaps: Vec<State>,
    env: Env<'a>,
}

impl<'a> Tx<'a> {
    pub fn new(s: &State, env: Env<'a>) -> Self {
        Tx {
            s: s.clone(),
            snaps: vec![s.clone()],
            env,
        }
    }

    pub fn read(&self, x: &Addr, f: &str) -> Result<HeapValue, StepError> {
        Ok(self.s.read(x, f)?.clone())
    }

    pub fn record(&self, x: &Addr) -> Result<Record, StepError> {
        self.s
            .heap()
            .get(x)
            .cloned()
            .ok_or_else(|| StepError::Memory(MemoryError::Dangling(x.clone())))
    }

    pub fn write(&mut self, x: &Addr, f: &str, v: HeapValue) -> Result<(), StepError> {
        Ok(self.s.write(x, f, v)?)
    }

    pub fn alloc(&mut self, x: &Addr, rec: Record) -> Result<(), StepError> {
        Ok(self.s.alloc(x.clone(), rec)?)
    }

    pub fn free(&mut self, x: &Addr) -> Result<(), StepError> {
        Ok(self.s.free(x)?)
    }

    /// `mark(x, x)`.
    pub fn mark(&mut self, x: &Addr) -> Result<(), StepError> {
        self.s = ghost_mark(&self.s, x, x, self.env.d, self.env.a)?;
        self.snap();
        Ok(())
    }

    pub fn unmark(&mut self, x: &Addr) -> Result<(), StepError> {
        self.s = ghost_unmark(&self.s, x, self.env.d)?;
        self.snap();
        Ok(())
    }

    /// `sync(I′)` where `I′` is the interface of the region re-read from
    /// the heap under its old inflow, with ghost labels from `overrides`
    /// and otherwise from the current graph.
    pub fn sync(&mut self, region: &[&Addr], overrides: &[(&Addr, NodeLabel)]) -> Result<(), StepError> {
        self.s = sync_state(&self.s, region, overrides, &self.env)?;
        self.snap();
        Ok(())
    }

    /// Allocates `x`, marks it and gives it `label` in one ghost step.
    pub fn alloc_node(&mut self, x: &Addr, rec: Record, label: NodeLabel) -> Result<(), StepError> {
        self.alloc(x, rec)?;
        let s = ghost_mark(&self.s, x, x, self.env.d, self.env.a)?;
        self.s = sync_state(&s, &[x], &[(x, label)], &self.env)?;
        self.snap();
        Ok(())
    }

    fn snap(&mut self) {
        if self.snaps.last() != Some(&self.s) {
            self.snaps.push(self.s.clone());
        }
    }

    /// The final state and the states after each ghost command, starting
    /// with the state before the step.
    pub fn finish(mut self) -> (State, Vec<State>) {
        self.snap();
        (self.s, self.snaps)
    }
}

fn sync_state(s: &State, region: &[&Addr], overrides: &[(&Addr, NodeLabel)], env: &Env) -> Result<State, StepError> {
    let set: BTreeSet<Addr> = region.iter().map(|x| (*x).clone()).collect();
    let name = {
        let parts: Vec<String> = set.iter().map(|x| x.to_string()).collect();
        format!("{{{}}}", parts.join(", "))
    };
    let (hr, _) = fg_decompose(s.graph(), &set, env.d);
    let mut hint = s.graph().graph().clone();
    for (x, l) in overrides {
        hint.set_label(x, l.clone());
    }
    let h2 = abstract_region(s, &set, env.gamma, hr.inflow(), Some(&hint), env.d)?;
    let i2 = interface_of(&h2, env.d, env.a);
    ghost_sync(s, &i2, env.gamma, env.d, env.a).map_err(|err| StepError::Sync { region: name, err })
}
