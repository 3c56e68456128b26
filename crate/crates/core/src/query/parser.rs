use super::ast::*;
use super::lexer::{lex, Tok, Token};
use crate::error::{Error, Pos, Result};
use crate::value::Value;

const QUERY_KEYWORDS: [&str; 5] = ["select", "from", "where", "and", "or"];

pub(crate) struct Parser {
    toks: Vec<Token>,
    at: usize,
}

impl Parser {
    pub(crate) fn new(src: &str) -> Result<Parser> {
        Ok(Parser { toks: lex(src)?, at: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.pos(), message: message.into() })
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T> {
        self.fail(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&tok.describe())
        }
    }

    fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    /// Case-insensitive keyword test.
    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.unexpected("a name"),
        }
    }

    /// A name that is not one of the query keywords.
    fn query_ident(&mut self) -> Result<String> {
        if QUERY_KEYWORDS.iter().any(|k| self.is_kw(k)) {
            return self.unexpected("a name");
        }
        self.ident()
    }

    fn dotted(&mut self) -> Result<Vec<String>> {
        let mut names = vec![self.ident()?];
        while *self.peek() == Tok::Dot {
            self.bump();
            names.push(self.ident()?);
        }
        Ok(names)
    }

    fn string(&mut self) -> Result<String> {
        match self.peek() {
            Tok::Str(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.unexpected("a string literal"),
        }
    }

    fn natural(&mut self) -> Result<u64> {
        match *self.peek() {
            Tok::Int(i) if i >= 0 => {
                self.bump();
                Ok(i as u64)
            }
            _ => self.unexpected("a non-negative integer"),
        }
    }

    fn is_literal_start(&self) -> bool {
        match self.peek() {
            Tok::Str(_) | Tok::Int(_) => true,
            Tok::Ident(s) => s == "null" && *self.peek2() == Tok::LParen,
            _ => false,
        }
    }

    fn literal(&mut self) -> Result<Value> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Ok(Value::Str(s))
            }
            Tok::Int(i) => {
                self.bump();
                Ok(Value::Int(i))
            }
            Tok::Ident(s) if s == "null" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let label = self.string()?;
                self.expect(Tok::RParen)?;
                Ok(Value::Null(label))
            }
            _ => self.unexpected("a literal"),
        }
    }

    // ---- queries

    fn path_expr(&mut self) -> Result<PathExpr> {
        let var = self.query_ident()?;
        let mut steps = Vec::new();
        while *self.peek() == Tok::Dot {
            self.bump();
            steps.push(self.ident()?);
        }
        Ok(PathExpr { var, steps })
    }

    fn operand(&mut self) -> Result<Operand> {
        if self.is_literal_start() {
            Ok(Operand::Lit(self.literal()?))
        } else {
            Ok(Operand::Path(self.path_expr()?))
        }
    }

    fn equality(&mut self) -> Result<Equality> {
        let lhs = self.operand()?;
        self.expect(Tok::Eq)?;
        let rhs = self.operand()?;
        Ok(Equality { lhs, rhs })
    }

    fn group(&mut self) -> Result<Vec<Equality>> {
        if *self.peek() != Tok::LParen {
            return Ok(vec![self.equality()?]);
        }
        self.bump();
        let mut alts = vec![self.equality()?];
        loop {
            if self.eat_kw("or") {
                alts.push(self.equality()?);
            } else if self.is_kw("and") {
                return self.fail("conjunction inside a parenthesised disjunction is not supported");
            } else {
                break;
            }
        }
        self.expect(Tok::RParen)?;
        Ok(alts)
    }

    fn conditions(&mut self) -> Result<Vec<Vec<Equality>>> {
        let first = self.group()?;
        if self.is_kw("or") {
            if first.len() > 1 {
                return self.fail("`or` after a parenthesised group; add parentheses");
            }
            let mut alts = first;
            while self.eat_kw("or") {
                alts.push(self.equality()?);
                if self.is_kw("and") {
                    return self.fail("mixing `and` and `or` requires parentheses");
                }
            }
            return Ok(vec![alts]);
        }
        let mut groups = vec![first];
        while self.eat_kw("and") {
            groups.push(self.group()?);
            if self.is_kw("or") {
                return self.fail("mixing `and` and `or` requires parentheses");
            }
        }
        Ok(groups)
    }

    pub(crate) fn query(&mut self) -> Result<Query> {
        self.expect_kw("select")?;
        let mut select = Vec::new();
        loop {
            let expr = self.path_expr()?;
            self.expect_kw("as")?;
            let alias = self.query_ident()?;
            select.push(SelectItem { expr, alias });
            if *self.peek() != Tok::Comma {
                break;
            }
            self.bump();
        }
        self.expect_kw("from")?;
        let mut from = Vec::new();
        loop {
            let node = self.query_ident()?;
            self.eat_kw("as");
            let var = self.query_ident()?;
            from.push(Binding { node, var });
            if *self.peek() != Tok::Comma {
                break;
            }
            self.bump();
        }
        let conditions = if self.eat_kw("where") { self.conditions()? } else { Vec::new() };
        Ok(Query { select, from, conditions })
    }

    // ---- scripts

    fn schema_decl(&mut self) -> Result<DeclKind> {
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut items = Vec::new();
        while *self.peek() != Tok::RBrace {
            let kw = self.ident()?;
            match kw.as_str() {
                "node" => loop {
                    items.push(SchemaItem::Node(self.ident()?));
                    if *self.peek() != Tok::Comma {
                        break;
                    }
                    self.bump();
                },
                "edge" | "attribute" => {
                    let n = self.ident()?;
                    self.expect(Tok::Colon)?;
                    let source = self.ident()?;
                    self.expect(Tok::Arrow)?;
                    let target = self.ident()?;
                    items.push(if kw == "edge" {
                        SchemaItem::Edge { name: n, source, target }
                    } else {
                        SchemaItem::Attribute { name: n, source, ty: target }
                    });
                }
                "equation" => {
                    let lhs = self.dotted()?;
                    self.expect(Tok::Eq)?;
                    let rhs = self.dotted()?;
                    items.push(SchemaItem::Equation { lhs, rhs });
                }
                _ => {
                    self.at -= 1;
                    return self.unexpected("`node`, `edge`, `attribute` or `equation`");
                }
            }
            self.expect(Tok::Semi)?;
        }
        self.bump();
        Ok(DeclKind::Schema { name, items })
    }

    fn instance_decl(&mut self) -> Result<DeclKind> {
        let name = self.ident()?;
        self.expect(Tok::Colon)?;
        let schema = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut items = Vec::new();
        while *self.peek() != Tok::RBrace {
            let key = self.dotted()?;
            self.expect(Tok::Eq)?;
            let mut entries = Vec::new();
            while *self.peek() != Tok::Semi {
                let row = self.natural()?;
                if *self.peek() == Tok::Arrow {
                    self.bump();
                    entries.push(Entry::Map(row, self.literal()?));
                } else {
                    entries.push(Entry::Row(row));
                }
                if *self.peek() != Tok::Comma {
                    break;
                }
                self.bump();
            }
            self.expect(Tok::Semi)?;
            items.push(Assignment { key, entries });
        }
        self.bump();
        Ok(DeclKind::Instance { name, schema, items })
    }

    fn mapping_decl(&mut self) -> Result<DeclKind> {
        let name = self.ident()?;
        self.expect(Tok::Colon)?;
        let source = self.ident()?;
        self.expect(Tok::Arrow)?;
        let target = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut items = Vec::new();
        while *self.peek() != Tok::RBrace {
            let kw = self.ident()?;
            match kw.as_str() {
                "node" => {
                    let from = self.ident()?;
                    self.expect(Tok::Arrow)?;
                    let to = self.ident()?;
                    items.push(MappingItem::Node { from, to });
                }
                "edge" => {
                    let key = self.dotted()?;
                    self.expect(Tok::Arrow)?;
                    let image = self.dotted()?;
                    items.push(MappingItem::Edge { key, image });
                }
                "attribute" => {
                    let key = self.dotted()?;
                    self.expect(Tok::Arrow)?;
                    let image = if self.is_literal_start() {
                        AttrTarget::Const(self.literal()?)
                    } else {
                        AttrTarget::Path(self.dotted()?)
                    };
                    items.push(MappingItem::Attribute { key, image });
                }
                _ => {
                    self.at -= 1;
                    return self.unexpected("`node`, `edge` or `attribute`");
                }
            }
            self.expect(Tok::Semi)?;
        }
        self.bump();
        Ok(DeclKind::Mapping { name, source, target, items })
    }

    fn link(&mut self) -> Result<Vec<String>> {
        let pos = self.pos();
        let link = self.dotted()?;
        if link.len() != 2 {
            return Err(Error::Syntax { pos, message: "expected an edge reference `Node.edge`".into() });
        }
        Ok(link)
    }

    fn expr(&mut self) -> Result<Expr> {
        let pos = self.pos();
        let op = self.ident()?;
        let e = match op.as_str() {
            "delta" | "sigma" | "pi" => {
                let mapping = self.ident()?;
                let instance = self.ident()?;
                match op.as_str() {
                    "delta" => Expr::Delta { mapping, instance },
                    "sigma" => Expr::Sigma { mapping, instance },
                    _ => Expr::Pi { mapping, instance },
                }
            }
            "union" => {
                let mut names = Vec::new();
                while let Tok::Ident(_) = self.peek() {
                    names.push(self.ident()?);
                }
                if names.is_empty() {
                    return self.unexpected("an instance name");
                }
                Expr::Union(names)
            }
            "disjoint_union" => Expr::DisjointUnion(self.ident()?, self.ident()?),
            "relationalize" => Expr::Relationalize(self.ident()?),
            "query" => {
                let instance = self.ident()?;
                self.expect(Tok::LBrace)?;
                let query = self.query()?;
                self.expect(Tok::RBrace)?;
                Expr::Query { instance, query }
            }
            "closure" => Expr::Closure { instance: self.ident()?, n: self.natural()? },
            "relation_closure" => Expr::RelationClosure { relation: self.ident()?, n: self.natural()? },
            "op" => Expr::Op(self.ident()?),
            "compose" => Expr::Compose(self.ident()?, self.ident()?),
            "translate" => Expr::Translate { isa: self.ident()?, syn: self.ident()?, n: self.natural()? },
            "link_view" => Expr::LinkView {
                portal: self.ident()?,
                relation: self.ident()?,
                link: self.link()?,
                name_attr: self.ident()?,
            },
            "retarget" => Expr::Retarget {
                portal: self.ident()?,
                pairs: self.ident()?,
                link: self.link()?,
                name_attr: self.ident()?,
            },
            "sql" => {
                let path = self.string()?;
                let schema = if self.eat_kw("as") { Some(self.ident()?) } else { None };
                Expr::Sql { path, schema }
            }
            "relation" | "function" => {
                self.expect(Tok::LBrace)?;
                let mut pairs = Vec::new();
                while *self.peek() != Tok::RBrace {
                    let a = self.string()?;
                    self.expect(Tok::Arrow)?;
                    pairs.push((a, self.string()?));
                    if *self.peek() != Tok::Comma {
                        break;
                    }
                    self.bump();
                }
                self.expect(Tok::RBrace)?;
                if op == "relation" {
                    Expr::Relation(pairs)
                } else {
                    Expr::Function(pairs)
                }
            }
            other => {
                return Err(Error::Syntax { pos, message: format!("unknown operation `{other}`") });
            }
        };
        Ok(e)
    }

    fn decl(&mut self) -> Result<Decl> {
        let pos = self.pos();
        let kw = self.ident()?;
        let kind = match kw.as_str() {
            "schema" => self.schema_decl()?,
            "instance" => self.instance_decl()?,
            "mapping" => self.mapping_decl()?,
            "let" => {
                let name = self.ident()?;
                self.expect(Tok::Eq)?;
                let expr = self.expr()?;
                self.expect(Tok::Semi)?;
                DeclKind::Let { name, expr }
            }
            "show" => {
                let name = self.ident()?;
                let format = if let Tok::Ident(_) = self.peek() { Some(self.ident()?) } else { None };
                self.expect(Tok::Semi)?;
                DeclKind::Show { name, format }
            }
            "export" => {
                let path = self.string()?;
                let name = self.ident()?;
                self.expect(Tok::Semi)?;
                DeclKind::Export { path, name }
            }
            other => {
                return Err(Error::Syntax { pos, message: format!("unknown declaration `{other}`") });
            }
        };
        Ok(Decl { pos, kind })
    }

    pub(crate) fn script(&mut self) -> Result<Script> {
        let mut decls = Vec::new();
        while !self.at_eof() {
            decls.push(self.decl()?);
        }
        Ok(Script { decls })
    }

    pub(crate) fn finish(&self) -> Result<()> {
        if self.at_eof() {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }
}

/// Parses a standalone select-from-where query.
pub fn parse_query(src: &str) -> Result<Query> {
    let mut p = Parser::new(src)?;
    let q = p.query()?;
    p.finish()?;
    Ok(q)
}

pub fn parse_script(src: &str) -> Result<Script> {
    Parser::new(src)?.script()
}
