//! Single-tape Turing machines on a right semi-infinite tape.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    L,
    R,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub state: String,
    pub read: String,
    pub write: String,
    #[serde(rename = "move")]
    pub mv: Move,
    pub next: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct TMSpec {
    states: Vec<String>,
    blank: String,
    transitions: Vec<Transition>,
    initial: String,
    halt: String,
    symbols: Vec<String>,
    table: HashMap<(usize, usize), (usize, Move, usize)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawSpec {
    states: Vec<String>,
    blank: String,
    transitions: Vec<Transition>,
    initial: String,
    halt: String,
}

impl TryFrom<RawSpec> for TMSpec {
    type Error = Error;

    fn try_from(r: RawSpec) -> Result<Self> {
        TMSpec::new(r.states, r.blank, r.transitions, r.initial, r.halt)
    }
}

impl From<TMSpec> for RawSpec {
    fn from(t: TMSpec) -> Self {
        RawSpec { states: t.states, blank: t.blank, transitions: t.transitions, initial: t.initial, halt: t.halt }
    }
}

/// Compact transition target: written symbol, move, next state.
pub type Action = (usize, Move, usize);

impl TMSpec {
    pub fn new(
        states: Vec<String>,
        blank: String,
        transitions: Vec<Transition>,
        initial: String,
        halt: String,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidMachine(m));
        let uniq: BTreeSet<&String> = states.iter().collect();
        if uniq.len() != states.len() {
            return bad("duplicate state names".into());
        }
        let sidx = |s: &str| states.iter().position(|x| x == s);
        let (Some(_), Some(h)) = (sidx(&initial), sidx(&halt)) else {
            return bad("initial and halt must be listed states".into());
        };
        let mut symbols = vec![blank.clone()];
        for t in &transitions {
            for s in [&t.read, &t.write] {
                if !symbols.contains(s) {
                    symbols.push(s.clone());
                }
            }
        }
        let mut table = HashMap::new();
        for t in &transitions {
            let (Some(q), Some(n)) = (sidx(&t.state), sidx(&t.next)) else {
                return bad(format!("unknown state in transition from {}", t.state));
            };
            if q == h {
                return bad("the halt state has transitions".into());
            }
            let rd = symbols.iter().position(|x| *x == t.read).unwrap();
            let wr = symbols.iter().position(|x| *x == t.write).unwrap();
            if table.insert((q, rd), (wr, t.mv, n)).is_some() {
                return bad(format!("two transitions for ({}, {})", t.state, t.read));
            }
        }
        Ok(TMSpec { states, blank, transitions, initial, halt, symbols, table })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    /// Tape symbols, blank first, then in order of appearance.
    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn blank(&self) -> &str {
        &self.blank
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn initial(&self) -> usize {
        self.states.iter().position(|x| *x == self.initial).unwrap()
    }

    pub fn halt(&self) -> usize {
        self.states.iter().position(|x| *x == self.halt).unwrap()
    }

    pub fn action(&self, q: usize, s: usize) -> Option<Action> {
        self.table.get(&(q, s)).copied()
    }

    /// Whether some transition enters `q` moving `m`.
    pub fn enters(&self, q: usize, m: Move) -> bool {
        self.table.values().any(|&(_, mv, n)| n == q && mv == m)
    }

    /// Runs from the empty tape for at most `budget` steps.
    pub fn simulate(&self, budget: usize) -> Result<Computation> {
        self.run(budget, false)
    }

    /// First `steps` steps of the run, or the whole run if it halts sooner.
    pub fn simulate_prefix(&self, steps: usize) -> Result<Computation> {
        self.run(steps, true)
    }

    fn run(&self, budget: usize, truncate: bool) -> Result<Computation> {
        let (q0, qh) = (self.initial(), self.halt());
        let mut tape = vec![0usize];
        let (mut head, mut q) = (0usize, q0);
        let mut rows = vec![Config { tape: tape.clone(), head, state: q }];
        let mut max_visited = 0;
        while q != qh {
            if rows.len() > budget {
                if truncate {
                    break;
                }
                return Err(Error::BudgetExceeded(budget));
            }
            let Some((w, m, n)) = self.action(q, tape[head]) else {
                return Err(Error::InvalidMachine(format!(
                    "no transition for ({}, {})",
                    self.states[q], self.symbols[tape[head]]
                )));
            };
            tape[head] = w;
            match m {
                Move::L if head == 0 => return Err(Error::HeadFellOff(rows.len() - 1)),
                Move::L => head -= 1,
                Move::R => head += 1,
            }
            if head == tape.len() {
                tape.push(0);
            }
            max_visited = max_visited.max(head);
            q = n;
            rows.push(Config { tape: tape.clone(), head, state: q });
        }
        Ok(Computation { rows, max_visited })
    }

    /// Whether the machine halts within `budget` steps with the head on the
    /// rightmost visited cell.
    pub fn check_normal_form(&self, budget: usize) -> Result<Computation> {
        let c = self.simulate(budget)?;
        let last = c.rows.last().unwrap();
        if last.head != c.max_visited {
            return Err(Error::NotNormalForm(format!(
                "halts at cell {} but visited cell {}",
                last.head, c.max_visited
            )));
        }
        Ok(c)
    }

    /// Equivalent machine that sweeps right past every visited cell before
    /// halting, so the head ends on the rightmost visited cell. Written
    /// blanks become a marked blank that reads like a blank.
    pub fn normalize(&self) -> TMSpec {
        let fresh = |base: &str, taken: &dyn Fn(&str) -> bool| {
            let mut s = base.to_string();
            while taken(&s) {
                s.push('\'');
            }
            s
        };
        let mark = fresh(&format!("{}'", self.blank), &|s| self.symbols.iter().any(|x| x == s));
        let sweep = fresh("sweep", &|s| self.states.iter().any(|x| x == s));
        let back = fresh("back", &|s| self.states.iter().any(|x| x == s) || s == sweep);
        let mut symbols = self.symbols.clone();
        symbols.push(mark.clone());
        let w = |s: &String| if *s == self.blank { mark.clone() } else { s.clone() };
        let n = |s: &String| if *s == self.halt { sweep.clone() } else { s.clone() };
        let mut ts = Vec::new();
        for t in &self.transitions {
            ts.push(Transition { write: w(&t.write), next: n(&t.next), ..t.clone() });
            if t.read == self.blank {
                ts.push(Transition { read: mark.clone(), write: w(&t.write), next: n(&t.next), ..t.clone() });
            }
        }
        for s in &symbols {
            if *s == self.blank {
                ts.push(Transition { state: sweep.clone(), read: s.clone(), write: mark.clone(), mv: Move::L, next: back.clone() });
            } else {
                ts.push(Transition { state: sweep.clone(), read: s.clone(), write: s.clone(), mv: Move::R, next: sweep.clone() });
            }
            ts.push(Transition { state: back.clone(), read: s.clone(), write: s.clone(), mv: Move::R, next: self.halt.clone() });
        }
        let mut states = self.states.clone();
        states.push(sweep);
        states.push(back);
        TMSpec::new(states, self.blank.clone(), ts, self.initial.clone(), self.halt.clone())
            .expect("gadget keeps the machine deterministic")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    /// Tape cells `0..=max visited so far`.
    pub tape: Vec<usize>,
    pub head: usize,
    pub state: usize,
}

/// Space-time diagram of a run, one row per step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Computation {
    pub rows: Vec<Config>,
    pub max_visited: usize,
}

impl Computation {
    pub fn steps(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn symbol_at(&self, t: usize, x: usize) -> usize {
        self.rows[t].tape.get(x).copied().unwrap_or(0)
    }
}

/// Writes 1 three times moving right, halting on cell 3.
pub fn three_step_machine() -> TMSpec {
    let t = |q: &str, n: &str| Transition { state: q.into(), read: "_".into(), write: "1".into(), mv: Move::R, next: n.into() };
    TMSpec::new(
        ["A", "B", "C", "H"].map(String::from).to_vec(),
        "_".into(),
        vec![t("A", "B"), t("B", "C"), t("C", "H")],
        "A".into(),
        "H".into(),
    )
    .unwrap()
}

/// One working state walking right forever.
pub fn looping_machine() -> TMSpec {
    TMSpec::new(
        ["A", "H"].map(String::from).to_vec(),
        "_".into(),
        vec![Transition { state: "A".into(), read: "_".into(), write: "_".into(), mv: Move::R, next: "A".into() }],
        "A".into(),
        "H".into(),
    )
    .unwrap()
}
