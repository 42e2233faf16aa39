//! Lexically scoped symbol table with def/use chains.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::frontend::{Ast, ExprContext, NodeId, NodeKind, ParamKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ScopeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SymbolId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScopeKind {
    Module,
    Class,
    Function,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scope {
    pub id: ScopeId,
    pub kind: ScopeKind,
    pub parent: Option<ScopeId>,
    pub owner: NodeId,
    pub symbols: BTreeMap<String, SymbolId>,
    globals: BTreeSet<String>,
    nonlocals: BTreeSet<String>,
}

/// How a symbol came into existence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymbolOrigin {
    /// Assigned, defined, or bound by a loop/with/except in this scope.
    Local,
    Parameter,
    /// Bound by an import; `module` is the fully qualified module or member.
    Import { module: String },
    /// Never bound in this file (builtins, star imports, globals of callers).
    External,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Symbol {
    pub id: SymbolId,
    pub name: String,
    pub scope: ScopeId,
    pub origin: SymbolOrigin,
    pub defs: Vec<NodeId>,
    pub uses: Vec<NodeId>,
}

impl Symbol {
    pub fn is_external(&self) -> bool {
        matches!(self.origin, SymbolOrigin::External | SymbolOrigin::Import { .. })
    }

    /// Fully qualified module path for imports, the bare name for unresolved
    /// externals.
    pub fn qualified_origin(&self) -> Option<&str> {
        match &self.origin {
            SymbolOrigin::Import { module } => Some(module),
            SymbolOrigin::External => Some(&self.name),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolTable {
    scopes: Vec<Scope>,
    symbols: Vec<Symbol>,
    owner_scope: BTreeMap<NodeId, ScopeId>,
    node_scope: HashMap<NodeId, ScopeId>,
    node_symbol: HashMap<NodeId, SymbolId>,
}

impl SymbolTable {
    pub fn module_scope(&self) -> ScopeId {
        ScopeId(0)
    }

    pub fn scopes(&self) -> &[Scope] {
        &self.scopes
    }

    pub fn scope(&self, id: ScopeId) -> &Scope {
        &self.scopes[id.0 as usize]
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn symbol(&self, id: SymbolId) -> &Symbol {
        &self.symbols[id.0 as usize]
    }

    /// Symbol bound or referenced by a name, parameter, alias, or definition node.
    pub fn symbol_of(&self, node: NodeId) -> Option<SymbolId> {
        self.node_symbol.get(&node).copied()
    }

    /// Scope created by a function, class, lambda, or comprehension node.
    pub fn scope_owned_by(&self, owner: NodeId) -> Option<ScopeId> {
        self.owner_scope.get(&owner).copied()
    }

    /// Innermost scope in which `node` is evaluated.
    pub fn scope_of(&self, node: NodeId) -> Option<ScopeId> {
        self.node_scope.get(&node).copied()
    }

    /// Resolves `name` as a load from `scope` using the language's lexical
    /// rules: local, then enclosing functions (class bodies are skipped),
    /// then module.
    pub fn lookup(&self, scope: ScopeId, name: &str) -> Option<SymbolId> {
        let start = self.scope(scope);
        if start.globals.contains(name) {
            return self.scope(self.module_scope()).symbols.get(name).copied();
        }
        if !start.nonlocals.contains(name) {
            if let Some(&s) = start.symbols.get(name) {
                return Some(s);
            }
        }
        let mut cur = start.parent;
        while let Some(id) = cur {
            let sc = self.scope(id);
            if sc.kind != ScopeKind::Class || id == self.module_scope() {
                if let Some(&s) = sc.symbols.get(name) {
                    return Some(s);
                }
            }
            cur = sc.parent;
        }
        None
    }

    /// Every name visible from `scope` or bound anywhere beneath it.
    pub fn names_near(&self, scope: ScopeId) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut cur = Some(scope);
        while let Some(id) = cur {
            out.extend(self.scope(id).symbols.keys().cloned());
            cur = self.scope(id).parent;
        }
        for sc in &self.scopes {
            if self.is_within(sc.id, scope) {
                out.extend(sc.symbols.keys().cloned());
            }
        }
        out
    }

    fn is_within(&self, inner: ScopeId, outer: ScopeId) -> bool {
        let mut cur = Some(inner);
        while let Some(id) = cur {
            if id == outer {
                return true;
            }
            cur = self.scope(id).parent;
        }
        false
    }

    /// Symbols declared directly in `scope`, in name order.
    pub fn symbols_in(&self, scope: ScopeId) -> impl Iterator<Item = &Symbol> + '_ {
        self.scope(scope).symbols.values().map(|&s| self.symbol(s))
    }
}

/// Builds the symbol table in two passes: bind every definition, then resolve
/// every load against the completed scopes.
pub fn build_symbol_table(ast: &Ast) -> SymbolTable {
    let mut b = Builder {
        ast,
        table: SymbolTable {
            scopes: Vec::new(),
            symbols: Vec::new(),
            owner_scope: BTreeMap::new(),
            node_scope: HashMap::new(),
            node_symbol: HashMap::new(),
        },
        loads: Vec::new(),
    };
    let module = b.new_scope(ScopeKind::Module, None, ast.root());
    for &stmt in ast.children(ast.root()) {
        b.visit(stmt, module);
    }
    b.resolve_loads();
    let mut table = b.table;
    for sym in &mut table.symbols {
        sym.defs.sort_by_key(|&d| (ast.span(d).start, d));
        sym.defs.dedup();
        sym.uses.sort_by_key(|&u| (ast.span(u).start, u));
        sym.uses.dedup();
    }
    table
}

struct Builder<'a> {
    ast: &'a Ast,
    table: SymbolTable,
    loads: Vec<(NodeId, ScopeId)>,
}

impl<'a> Builder<'a> {
    fn new_scope(&mut self, kind: ScopeKind, parent: Option<ScopeId>, owner: NodeId) -> ScopeId {
        let id = ScopeId(self.table.scopes.len() as u32);
        self.table.scopes.push(Scope {
            id,
            kind,
            parent,
            owner,
            symbols: BTreeMap::new(),
            globals: BTreeSet::new(),
            nonlocals: BTreeSet::new(),
        });
        self.table.owner_scope.insert(owner, id);
        id
    }

    fn bind(&mut self, scope: ScopeId, name: &str, def: NodeId, origin: SymbolOrigin) -> SymbolId {
        let mut target = scope;
        let sc = &self.table.scopes[scope.0 as usize];
        if sc.globals.contains(name) {
            target = ScopeId(0);
        } else if sc.nonlocals.contains(name) {
            let mut cur = sc.parent;
            while let Some(id) = cur {
                let s = &self.table.scopes[id.0 as usize];
                if s.kind == ScopeKind::Function && s.symbols.contains_key(name) {
                    target = id;
                    break;
                }
                cur = s.parent;
            }
        }
        let existing = self.table.scopes[target.0 as usize].symbols.get(name).copied();
        let id = match existing {
            Some(id) => {
                let sym = &mut self.table.symbols[id.0 as usize];
                // Parameters and imports keep their origin; a later plain
                // assignment only adds a def.
                if sym.origin == SymbolOrigin::External {
                    sym.origin = origin;
                }
                id
            }
            None => {
                let id = SymbolId(self.table.symbols.len() as u32);
                self.table.symbols.push(Symbol {
                    id,
                    name: name.to_string(),
                    scope: target,
                    origin,
                    defs: Vec::new(),
                    uses: Vec::new(),
                });
                self.table.scopes[target.0 as usize].symbols.insert(name.to_string(), id);
                id
            }
        };
        self.table.symbols[id.0 as usize].defs.push(def);
        self.table.node_symbol.insert(def, id);
        id
    }

    fn visit(&mut self, node: NodeId, scope: ScopeId) {
        self.table.node_scope.insert(node, scope);
        let ast = self.ast;
        match ast.kind(node) {
            NodeKind::FunctionDef { name, .. } => {
                for d in ast.decorators(node) {
                    self.visit(d, scope);
                }
                let inner = self.new_scope(ScopeKind::Function, Some(scope), node);
                let params_node = ast
                    .children(node)
                    .iter()
                    .copied()
                    .find(|&c| matches!(ast.kind(c), NodeKind::Parameters))
                    .unwrap();
                self.visit_params(params_node, scope, inner);
                let body = ast.body(node).unwrap();
                for &c in ast.children(node) {
                    if c != body && c != params_node && !matches!(ast.kind(c), NodeKind::Decorator) {
                        self.visit(c, scope);
                    }
                }
                self.bind(scope, name, node, SymbolOrigin::Local);
                self.table.node_scope.insert(body, inner);
                self.collect_declarations(body, inner);
                for &s in ast.children(body) {
                    self.visit(s, inner);
                }
            }
            NodeKind::Lambda => {
                let inner = self.new_scope(ScopeKind::Function, Some(scope), node);
                let params_node = ast.child(node, 0);
                self.visit_params(params_node, scope, inner);
                self.visit(ast.child(node, 1), inner);
            }
            NodeKind::ClassDef { name } => {
                let body = ast.body(node).unwrap();
                for &c in ast.children(node) {
                    if c != body {
                        self.visit(c, scope);
                    }
                }
                self.bind(scope, name, node, SymbolOrigin::Local);
                let inner = self.new_scope(ScopeKind::Class, Some(scope), node);
                self.table.node_scope.insert(body, inner);
                self.collect_declarations(body, inner);
                for &s in ast.children(body) {
                    self.visit(s, inner);
                }
            }
            NodeKind::ListComp | NodeKind::SetComp | NodeKind::DictComp | NodeKind::GeneratorExp => {
                let inner = self.new_scope(ScopeKind::Function, Some(scope), node);
                let clauses: Vec<NodeId> = ast
                    .children(node)
                    .iter()
                    .copied()
                    .filter(|&c| matches!(ast.kind(c), NodeKind::Comprehension { .. }))
                    .collect();
                for (i, &clause) in clauses.iter().enumerate() {
                    self.table.node_scope.insert(clause, inner);
                    let parts = ast.children(clause);
                    // The outermost iterable is evaluated in the enclosing scope.
                    self.visit(parts[1], if i == 0 { scope } else { inner });
                    self.visit(parts[0], inner);
                    for &cond in &parts[2..] {
                        self.visit(cond, inner);
                    }
                }
                for &c in ast.children(node) {
                    if !clauses.contains(&c) {
                        self.visit(c, inner);
                    }
                }
            }
            NodeKind::Name { id, ctx } => match ctx {
                ExprContext::Load => self.loads.push((node, scope)),
                ExprContext::Store | ExprContext::Del => {
                    let target = if matches!(ast.parent(node).map(|p| ast.kind(p)), Some(NodeKind::NamedExpr)) {
                        self.enclosing_non_comprehension(scope)
                    } else {
                        scope
                    };
                    self.bind(target, id, node, SymbolOrigin::Local);
                    let is_aug_target = ast
                        .parent(node)
                        .is_some_and(|p| matches!(ast.kind(p), NodeKind::AugAssign { .. }) && ast.child(p, 0) == node);
                    if is_aug_target || *ctx == ExprContext::Del {
                        self.loads.push((node, scope));
                    }
                }
            },
            NodeKind::Import => {
                for &alias in ast.children(node) {
                    self.table.node_scope.insert(alias, scope);
                    if let NodeKind::Alias { name, asname } = ast.kind(alias) {
                        let (bound, module) = match asname {
                            Some(a) => (a.clone(), name.clone()),
                            None => {
                                let first = name.split('.').next().unwrap().to_string();
                                (first.clone(), first)
                            }
                        };
                        self.bind(scope, &bound, alias, SymbolOrigin::Import { module });
                    }
                }
            }
            NodeKind::ImportFrom { module, level } => {
                for &alias in ast.children(node) {
                    self.table.node_scope.insert(alias, scope);
                    if let NodeKind::Alias { name, asname } = ast.kind(alias) {
                        if name == "*" {
                            continue;
                        }
                        let bound = asname.clone().unwrap_or_else(|| name.clone());
                        let prefix = ".".repeat(*level);
                        let full = if module.is_empty() {
                            format!("{prefix}{name}")
                        } else {
                            format!("{prefix}{module}.{name}")
                        };
                        self.bind(scope, &bound, alias, SymbolOrigin::Import { module: full });
                    }
                }
            }
            NodeKind::ExceptHandler { name } => {
                if let Some(n) = name {
                    self.bind(scope, n, node, SymbolOrigin::Local);
                }
                for &c in ast.children(node) {
                    self.visit(c, scope);
                }
            }
            _ => {
                for &c in ast.children(node) {
                    self.visit(c, scope);
                }
            }
        }
    }

    fn visit_params(&mut self, params_node: NodeId, outer: ScopeId, inner: ScopeId) {
        let ast = self.ast;
        self.table.node_scope.insert(params_node, inner);
        for &p in ast.children(params_node) {
            self.table.node_scope.insert(p, inner);
            for &c in ast.children(p) {
                self.visit(c, outer);
            }
            if let NodeKind::Param { name, kind, .. } = ast.kind(p) {
                if *kind != ParamKind::Marker {
                    self.bind(inner, name, p, SymbolOrigin::Parameter);
                }
            }
        }
    }

    /// Records `global` / `nonlocal` declarations before any binding in the
    /// block is processed.
    fn collect_declarations(&mut self, body: NodeId, scope: ScopeId) {
        for n in self.ast.descendants_in_scope(body) {
            match self.ast.kind(n) {
                NodeKind::Global { names } => {
                    self.table.scopes[scope.0 as usize].globals.extend(names.iter().cloned());
                }
                NodeKind::Nonlocal { names } => {
                    self.table.scopes[scope.0 as usize].nonlocals.extend(names.iter().cloned());
                }
                _ => {}
            }
        }
    }

    fn enclosing_non_comprehension(&self, scope: ScopeId) -> ScopeId {
        let mut cur = scope;
        loop {
            let sc = &self.table.scopes[cur.0 as usize];
            let is_comp = matches!(
                self.ast.kind(sc.owner),
                NodeKind::ListComp | NodeKind::SetComp | NodeKind::DictComp | NodeKind::GeneratorExp
            );
            match (is_comp, sc.parent) {
                (true, Some(p)) => cur = p,
                _ => return cur,
            }
        }
    }

    fn resolve_loads(&mut self) {
        let loads = std::mem::take(&mut self.loads);
        for (node, scope) in loads {
            let name = match self.ast.kind(node) {
                NodeKind::Name { id, .. } => id.clone(),
                _ => continue,
            };
            let sym = match self.table.lookup(scope, &name) {
                Some(s) => s,
                None => {
                    let id = SymbolId(self.table.symbols.len() as u32);
                    self.table.symbols.push(Symbol {
                        id,
                        name: name.clone(),
                        scope: ScopeId(0),
                        origin: SymbolOrigin::External,
                        defs: Vec::new(),
                        uses: Vec::new(),
                    });
                    self.table.scopes[0].symbols.insert(name, id);
                    id
                }
            };
            self.table.symbols[sym.0 as usize].uses.push(node);
            self.table.node_symbol.insert(node, sym);
        }
    }
}
