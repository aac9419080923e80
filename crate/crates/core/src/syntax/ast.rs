use super::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    FloorDiv,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::FloorDiv => "//",
            BinOp::Mod => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    pub fn from_symbol(s: &str) -> Option<BinOp> {
        Some(match s {
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "//" => BinOp::FloorDiv,
            "%" => BinOp::Mod,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "and" => BinOp::And,
            "or" => BinOp::Or,
            _ => return None,
        })
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Int(i64),
    Str(String),
    Bool(bool),
    None,
    List(Vec<Expr>),
    Name(String),
    Index(Box<Expr>, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    pub fn name(name: impl Into<String>, span: Span) -> Self {
        Expr::new(ExprKind::Name(name.into()), span)
    }

    /// Visits this expression and every subexpression, parents first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::List(items) | ExprKind::Call(_, items) => items.iter().for_each(|e| e.walk(f)),
            ExprKind::Index(a, b) | ExprKind::Binary(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            ExprKind::Unary(_, e) => e.walk(f),
            _ => {}
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut Expr)) {
        f(self);
        match &mut self.kind {
            ExprKind::List(items) | ExprKind::Call(_, items) => items.iter_mut().for_each(|e| e.walk_mut(f)),
            ExprKind::Index(a, b) | ExprKind::Binary(_, a, b) => {
                a.walk_mut(f);
                b.walk_mut(f);
            }
            ExprKind::Unary(_, e) => e.walk_mut(f),
            _ => {}
        }
    }

    fn clear_spans(&mut self) {
        self.walk_mut(&mut |e| e.span = Span::default());
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Name(String),
    Index(String, Expr),
}

impl Target {
    pub fn base(&self) -> &str {
        match self {
            Target::Name(n) | Target::Index(n, _) => n,
        }
    }
}

pub type Block = Vec<Stmt>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Assign { target: Target, value: Expr },
    If { arms: Vec<(Expr, Block)>, else_block: Option<Block> },
    While { cond: Expr, body: Block },
    For { var: String, args: Vec<Expr>, body: Block },
    Return(Option<Expr>),
    Break,
    Continue,
    Pass,
    Expr(Expr),
}

impl Stmt {
    pub fn new(kind: StmtKind, span: Span) -> Self {
        Stmt { kind, span }
    }

    /// Child blocks in source order.
    pub fn blocks(&self) -> Vec<&Block> {
        match &self.kind {
            StmtKind::If { arms, else_block } => {
                arms.iter().map(|(_, b)| b).chain(else_block.as_ref()).collect()
            }
            StmtKind::While { body, .. } | StmtKind::For { body, .. } => vec![body],
            _ => Vec::new(),
        }
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut Block> {
        match &mut self.kind {
            StmtKind::If { arms, else_block } => {
                arms.iter_mut().map(|(_, b)| b).chain(else_block.as_mut()).collect()
            }
            StmtKind::While { body, .. } | StmtKind::For { body, .. } => vec![body],
            _ => Vec::new(),
        }
    }

    /// Expressions evaluated directly by this statement (not by child blocks).
    pub fn exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::Assign { target, value } => match target {
                Target::Name(_) => vec![value],
                Target::Index(_, idx) => vec![idx, value],
            },
            StmtKind::If { arms, .. } => arms.iter().map(|(c, _)| c).collect(),
            StmtKind::While { cond, .. } => vec![cond],
            StmtKind::For { args, .. } => args.iter().collect(),
            StmtKind::Return(Some(e)) | StmtKind::Expr(e) => vec![e],
            _ => Vec::new(),
        }
    }

    pub fn exprs_mut(&mut self) -> Vec<&mut Expr> {
        match &mut self.kind {
            StmtKind::Assign { target, value } => match target {
                Target::Name(_) => vec![value],
                Target::Index(_, idx) => vec![idx, value],
            },
            StmtKind::If { arms, .. } => arms.iter_mut().map(|(c, _)| c).collect(),
            StmtKind::While { cond, .. } => vec![cond],
            StmtKind::For { args, .. } => args.iter_mut().collect(),
            StmtKind::Return(Some(e)) | StmtKind::Expr(e) => vec![e],
            _ => Vec::new(),
        }
    }

    /// Visits this statement and every statement nested in its blocks.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        f(self);
        for block in self.blocks() {
            block.iter().for_each(|s| s.walk(f));
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut Stmt)) {
        f(self);
        for block in self.blocks_mut() {
            block.iter_mut().for_each(|s| s.walk_mut(f));
        }
    }

    fn clear_spans(&mut self) {
        self.walk_mut(&mut |s| {
            s.span = Span::default();
            s.exprs_mut().into_iter().for_each(Expr::clear_spans);
        });
    }

    /// True when control never falls off the end of this statement: a
    /// `return`, or an `if` with an `else` whose every branch ends in one.
    pub fn ends_in_return(&self) -> bool {
        match &self.kind {
            StmtKind::Return(_) => true,
            StmtKind::If { arms, else_block: Some(else_block) } => {
                arms.iter().all(|(_, b)| block_ends_in_return(b)) && block_ends_in_return(else_block)
            }
            _ => false,
        }
    }
}

pub fn block_ends_in_return(block: &[Stmt]) -> bool {
    block.last().is_some_and(Stmt::ends_in_return)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<String>,
    /// Statements and nested definitions in source order.
    pub body: Vec<Item>,
    pub span: Span,
}

impl FunctionDef {
    pub fn nested(&self) -> impl Iterator<Item = &FunctionDef> {
        self.body.iter().filter_map(Item::as_function)
    }

    pub fn nested_named(&self, name: &str) -> Option<&FunctionDef> {
        self.nested().find(|f| f.name == name)
    }

    pub fn statements(&self) -> impl Iterator<Item = &Stmt> {
        self.body.iter().filter_map(Item::as_stmt)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Function(FunctionDef),
    Stmt(Stmt),
}

impl Item {
    pub fn as_function(&self) -> Option<&FunctionDef> {
        match self {
            Item::Function(f) => Some(f),
            Item::Stmt(_) => None,
        }
    }

    pub fn as_stmt(&self) -> Option<&Stmt> {
        match self {
            Item::Stmt(s) => Some(s),
            Item::Function(_) => None,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            Item::Function(f) => f.span,
            Item::Stmt(s) => s.span,
        }
    }

    fn clear_spans(&mut self) {
        match self {
            Item::Function(f) => {
                f.span = Span::default();
                f.body.iter_mut().for_each(Item::clear_spans);
            }
            Item::Stmt(s) => s.clear_spans(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModuleAst {
    pub items: Vec<Item>,
}

impl ModuleAst {
    pub fn functions(&self) -> impl Iterator<Item = &FunctionDef> {
        self.items.iter().filter_map(Item::as_function)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions().find(|f| f.name == name)
    }

    pub fn top_level_statements(&self) -> impl Iterator<Item = &Stmt> {
        self.items.iter().filter_map(Item::as_stmt)
    }

    /// Copy with every span zeroed; two modules are structurally equal when
    /// their stripped forms are equal.
    pub fn without_spans(&self) -> ModuleAst {
        let mut copy = self.clone();
        copy.items.iter_mut().for_each(Item::clear_spans);
        copy
    }

    pub fn structurally_eq(&self, other: &ModuleAst) -> bool {
        self.without_spans() == other.without_spans()
    }
}
