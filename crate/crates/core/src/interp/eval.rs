use std::collections::HashMap;

use serde::Serialize;

use super::value::Value;
use crate::syntax::{BinOp, Block, Expr, ExprKind, FunctionDef, ModuleAst, Stmt, StmtKind, Target, UnOp};

pub const DEFAULT_STEP_LIMIT: u64 = 1_000_000;

/// Deepest user-function call chain before execution is cut off.
pub const MAX_CALL_DEPTH: usize = 150;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RuntimeErrorKind {
    DivZero,
    Overflow,
    TypeError,
    IndexError,
    UnboundName,
    StepLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Ok,
    RuntimeError(RuntimeErrorKind),
}

/// Observable result of one execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecOutcome {
    pub status: Status,
    pub output: Vec<String>,
    /// `repr` of the entry function's return value, when one was called.
    pub result: Option<String>,
}

impl Serialize for ExecOutcome {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(None)?;
        match self.status {
            Status::Ok => map.serialize_entry("status", "ok")?,
            Status::RuntimeError(kind) => {
                map.serialize_entry("status", "runtime_error")?;
                map.serialize_entry("error", &kind)?;
            }
        }
        map.serialize_entry("output", &self.output)?;
        map.serialize_entry("result", &self.result)?;
        map.end()
    }
}

enum Flow {
    Normal,
    Break,
    Continue,
    Return(Value),
}

type Exec<T> = Result<T, RuntimeErrorKind>;

struct Frame<'m> {
    vars: HashMap<String, Value>,
    func: Option<&'m FunctionDef>,
}

struct Interp<'m> {
    module: &'m ModuleAst,
    steps: u64,
    limit: u64,
    output: Vec<String>,
    depth: usize,
}

/// Runs top-level statements in order, then `main()` when it takes no
/// parameters.
pub fn run_module(module: &ModuleAst, step_limit: u64) -> ExecOutcome {
    let mut interp = Interp::new(module, step_limit);
    let mut frame = Frame { vars: HashMap::new(), func: None };
    let top: Vec<&Stmt> = module.top_level_statements().collect();
    let mut status = Status::Ok;
    let mut result = None;
    for stmt in top {
        if let Err(kind) = interp.exec(&mut frame, stmt) {
            status = Status::RuntimeError(kind);
            break;
        }
    }
    if status == Status::Ok {
        if let Some(main) = module.function("main").filter(|f| f.params.is_empty()) {
            match interp.call(main, Vec::new()) {
                Ok(v) => result = Some(v.repr()),
                Err(kind) => status = Status::RuntimeError(kind),
            }
        }
    }
    ExecOutcome { status, output: interp.output, result }
}

/// Calls top-level function `name` with `args` in a fresh interpreter.
pub fn call_function(module: &ModuleAst, name: &str, args: Vec<Value>, step_limit: u64) -> ExecOutcome {
    let mut interp = Interp::new(module, step_limit);
    let (status, result) = match module.function(name) {
        None => (Status::RuntimeError(RuntimeErrorKind::UnboundName), None),
        Some(f) => match interp.call(f, args) {
            Ok(v) => (Status::Ok, Some(v.repr())),
            Err(kind) => (Status::RuntimeError(kind), None),
        },
    };
    ExecOutcome { status, output: interp.output, result }
}

impl<'m> Interp<'m> {
    fn new(module: &'m ModuleAst, limit: u64) -> Self {
        Interp { module, steps: 0, limit, output: Vec::new(), depth: 0 }
    }

    fn call(&mut self, f: &'m FunctionDef, args: Vec<Value>) -> Exec<Value> {
        if args.len() != f.params.len() {
            return Err(RuntimeErrorKind::TypeError);
        }
        if self.depth >= MAX_CALL_DEPTH {
            return Err(RuntimeErrorKind::StepLimit);
        }
        let vars = f.params.iter().cloned().zip(args).collect();
        let mut frame = Frame { vars, func: Some(f) };
        self.depth += 1;
        let flow = self.exec_items(&mut frame, f);
        self.depth -= 1;
        match flow? {
            Flow::Return(v) => Ok(v),
            _ => Ok(Value::None),
        }
    }

    fn exec_items(&mut self, frame: &mut Frame<'m>, f: &'m FunctionDef) -> Exec<Flow> {
        for stmt in f.statements() {
            match self.exec(frame, stmt)? {
                Flow::Normal => {}
                other => return Ok(other),
            }
        }
        Ok(Flow::Normal)
    }

    fn exec_block(&mut self, frame: &mut Frame<'m>, block: &'m Block) -> Exec<Flow> {
        for stmt in block {
            match self.exec(frame, stmt)? {
                Flow::Normal => {}
                other => return Ok(other),
            }
        }
        Ok(Flow::Normal)
    }

    fn exec(&mut self, frame: &mut Frame<'m>, stmt: &'m Stmt) -> Exec<Flow> {
        self.steps += 1;
        if self.steps > self.limit {
            return Err(RuntimeErrorKind::StepLimit);
        }
        match &stmt.kind {
            StmtKind::Assign { target, value } => {
                let v = self.eval(frame, value)?;
                match target {
                    Target::Name(n) => {
                        frame.vars.insert(n.clone(), v);
                    }
                    Target::Index(n, idx) => {
                        let base = frame.vars.get(n).cloned().ok_or(RuntimeErrorKind::UnboundName)?;
                        let i = self.eval(frame, idx)?;
                        let Value::List(items) = base else { return Err(RuntimeErrorKind::TypeError) };
                        let Value::Int(i) = i else { return Err(RuntimeErrorKind::TypeError) };
                        let mut items = items.borrow_mut();
                        let slot = normalize_index(i, items.len())?;
                        items[slot] = v;
                    }
                }
                Ok(Flow::Normal)
            }
            StmtKind::If { arms, else_block } => {
                for (cond, body) in arms {
                    if self.eval(frame, cond)?.truthy() {
                        return self.exec_block(frame, body);
                    }
                }
                match else_block {
                    Some(b) => self.exec_block(frame, b),
                    None => Ok(Flow::Normal),
                }
            }
            StmtKind::While { cond, body } => {
                while self.eval(frame, cond)?.truthy() {
                    match self.exec_block(frame, body)? {
                        Flow::Break => break,
                        Flow::Return(v) => return Ok(Flow::Return(v)),
                        Flow::Normal | Flow::Continue => {}
                    }
                }
                Ok(Flow::Normal)
            }
            StmtKind::For { var, args, body } => {
                let mut bounds = Vec::with_capacity(args.len());
                for a in args {
                    match self.eval(frame, a)? {
                        Value::Int(n) => bounds.push(n),
                        _ => return Err(RuntimeErrorKind::TypeError),
                    }
                }
                let (start, stop, step) = match bounds[..] {
                    [stop] => (0, stop, 1),
                    [start, stop] => (start, stop, 1),
                    [start, stop, step] => (start, stop, step),
                    _ => return Err(RuntimeErrorKind::TypeError),
                };
                if step == 0 {
                    return Err(RuntimeErrorKind::TypeError);
                }
                let mut i = start;
                while (step > 0 && i < stop) || (step < 0 && i > stop) {
                    frame.vars.insert(var.clone(), Value::Int(i));
                    match self.exec_block(frame, body)? {
                        Flow::Break => break,
                        Flow::Return(v) => return Ok(Flow::Return(v)),
                        Flow::Normal | Flow::Continue => {}
                    }
                    match i.checked_add(step) {
                        Some(next) => i = next,
                        None => break,
                    }
                }
                Ok(Flow::Normal)
            }
            StmtKind::Return(e) => {
                let v = match e {
                    Some(e) => self.eval(frame, e)?,
                    None => Value::None,
                };
                Ok(Flow::Return(v))
            }
            StmtKind::Break => Ok(Flow::Break),
            StmtKind::Continue => Ok(Flow::Continue),
            StmtKind::Pass => Ok(Flow::Normal),
            StmtKind::Expr(e) => {
                self.eval(frame, e)?;
                Ok(Flow::Normal)
            }
        }
    }

    fn resolve(&self, frame: &Frame<'m>, name: &str) -> Option<&'m FunctionDef> {
        frame
            .func
            .and_then(|f| f.nested_named(name))
            .or_else(|| self.module.function(name))
    }

    fn eval(&mut self, frame: &mut Frame<'m>, e: &'m Expr) -> Exec<Value> {
        Ok(match &e.kind {
            ExprKind::Int(n) => Value::Int(*n),
            ExprKind::Str(s) => Value::str(s),
            ExprKind::Bool(b) => Value::Bool(*b),
            ExprKind::None => Value::None,
            ExprKind::List(items) => {
                let mut values = Vec::with_capacity(items.len());
                for item in items {
                    values.push(self.eval(frame, item)?);
                }
                Value::list(values)
            }
            ExprKind::Name(n) => frame.vars.get(n).cloned().ok_or(RuntimeErrorKind::UnboundName)?,
            ExprKind::Index(base, idx) => {
                let base = self.eval(frame, base)?;
                let idx = self.eval(frame, idx)?;
                let Value::Int(i) = idx else { return Err(RuntimeErrorKind::TypeError) };
                match base {
                    Value::List(items) => {
                        let items = items.borrow();
                        items[normalize_index(i, items.len())?].clone()
                    }
                    Value::Str(s) => {
                        let chars: Vec<char> = s.chars().collect();
                        let c = chars[normalize_index(i, chars.len())?];
                        Value::str(&c.to_string())
                    }
                    _ => return Err(RuntimeErrorKind::TypeError),
                }
            }
            ExprKind::Unary(UnOp::Neg, operand) => match self.eval(frame, operand)? {
                Value::Int(n) => Value::Int(n.checked_neg().ok_or(RuntimeErrorKind::Overflow)?),
                _ => return Err(RuntimeErrorKind::TypeError),
            },
            ExprKind::Unary(UnOp::Not, operand) => Value::Bool(!self.eval(frame, operand)?.truthy()),
            ExprKind::Binary(BinOp::And, lhs, rhs) => {
                let l = self.eval(frame, lhs)?;
                if !l.truthy() {
                    l
                } else {
                    self.eval(frame, rhs)?
                }
            }
            ExprKind::Binary(BinOp::Or, lhs, rhs) => {
                let l = self.eval(frame, lhs)?;
                if l.truthy() {
                    l
                } else {
                    self.eval(frame, rhs)?
                }
            }
            ExprKind::Binary(op, lhs, rhs) => {
                let l = self.eval(frame, lhs)?;
                let r = self.eval(frame, rhs)?;
                binary(*op, &l, &r)?
            }
            ExprKind::Call(name, args) => {
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    values.push(self.eval(frame, a)?);
                }
                match self.resolve(frame, name) {
                    Some(f) => self.call(f, values)?,
                    None => self.builtin(name, values)?,
                }
            }
        })
    }

    fn builtin(&mut self, name: &str, args: Vec<Value>) -> Exec<Value> {
        match name {
            "print" => {
                let line = args.iter().map(Value::display).collect::<Vec<_>>().join(" ");
                self.output.push(line);
                Ok(Value::None)
            }
            "len" => match args.as_slice() {
                [Value::Str(s)] => Ok(Value::Int(s.chars().count() as i64)),
                [Value::List(items)] => Ok(Value::Int(items.borrow().len() as i64)),
                _ => Err(RuntimeErrorKind::TypeError),
            },
            _ => Err(RuntimeErrorKind::UnboundName),
        }
    }
}

fn normalize_index(i: i64, len: usize) -> Exec<usize> {
    let len = len as i64;
    let idx = if i < 0 { i + len } else { i };
    if (0..len).contains(&idx) {
        Ok(idx as usize)
    } else {
        Err(RuntimeErrorKind::IndexError)
    }
}

fn binary(op: BinOp, l: &Value, r: &Value) -> Exec<Value> {
    use RuntimeErrorKind::*;
    match op {
        BinOp::Eq => return Ok(Value::Bool(values_equal(l, r, 0)?)),
        BinOp::Ne => return Ok(Value::Bool(!values_equal(l, r, 0)?)),
        _ => {}
    }
    if op.is_comparison() {
        let ord = match (l, r) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Str(a), Value::Str(b)) => a.cmp(b),
            _ => return Err(TypeError),
        };
        let holds = match op {
            BinOp::Lt => ord.is_lt(),
            BinOp::Le => ord.is_le(),
            BinOp::Gt => ord.is_gt(),
            _ => ord.is_ge(),
        };
        return Ok(Value::Bool(holds));
    }
    match (op, l, r) {
        (BinOp::Add, Value::Str(a), Value::Str(b)) => Ok(Value::str(&format!("{a}{b}"))),
        (BinOp::Add, Value::List(a), Value::List(b)) => {
            let mut items = a.borrow().clone();
            items.extend(b.borrow().iter().cloned());
            Ok(Value::list(items))
        }
        (_, Value::Int(a), Value::Int(b)) => {
            let (a, b) = (*a, *b);
            let v = match op {
                BinOp::Add => a.checked_add(b),
                BinOp::Sub => a.checked_sub(b),
                BinOp::Mul => a.checked_mul(b),
                BinOp::FloorDiv | BinOp::Mod => {
                    if b == 0 {
                        return Err(DivZero);
                    }
                    let q = a.checked_div(b).ok_or(Overflow)?;
                    let r = a.checked_rem(b).ok_or(Overflow)?;
                    let adjust = r != 0 && ((r < 0) != (b < 0));
                    if op == BinOp::FloorDiv {
                        if adjust {
                            q.checked_sub(1)
                        } else {
                            Some(q)
                        }
                    } else if adjust {
                        r.checked_add(b)
                    } else {
                        Some(r)
                    }
                }
                _ => unreachable!("logical and comparison operators handled above"),
            };
            v.map(Value::Int).ok_or(Overflow)
        }
        _ => Err(TypeError),
    }
}

/// Structural equality; values of different types are unequal.
fn values_equal(l: &Value, r: &Value, depth: usize) -> Exec<bool> {
    if depth > 64 {
        return Err(RuntimeErrorKind::StepLimit);
    }
    Ok(match (l, r) {
        (Value::Int(a), Value::Int(b)) => a == b,
        (Value::Str(a), Value::Str(b)) => a == b,
        (Value::Bool(a), Value::Bool(b)) => a == b,
        (Value::None, Value::None) => true,
        (Value::List(a), Value::List(b)) => {
            if std::rc::Rc::ptr_eq(a, b) {
                return Ok(true);
            }
            let (a, b) = (a.borrow(), b.borrow());
            if a.len() != b.len() {
                return Ok(false);
            }
            for (x, y) in a.iter().zip(b.iter()) {
                if !values_equal(x, y, depth + 1)? {
                    return Ok(false);
                }
            }
            true
        }
        _ => false,
    })
}
