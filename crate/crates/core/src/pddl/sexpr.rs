use std::fmt;

/// Line and column, both 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Loc {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Sexp {
    Atom(String, Loc),
    List(Vec<Sexp>, Loc),
}

impl Sexp {
    pub fn loc(&self) -> Loc {
        match self {
            Sexp::Atom(_, l) | Sexp::List(_, l) => *l,
        }
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a, _) => Some(a),
            Sexp::List(..) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(xs, _) => Some(xs),
            Sexp::Atom(..) => None,
        }
    }

    /// First element of a list when it is an atom.
    pub fn head(&self) -> Option<&str> {
        self.list().and_then(|xs| xs.first()).and_then(Sexp::atom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub loc: Loc,
    pub message: String,
}

/// Reads every top-level expression. Atoms are lower-cased; `;` starts a
/// comment running to the end of the line.
pub fn parse_all(text: &str) -> Result<Vec<Sexp>, SyntaxError> {
    let mut stack: Vec<(Vec<Sexp>, Loc)> = vec![];
    let mut top = vec![];
    let (mut line, mut col) = (1usize, 0usize);
    let mut chars = text.chars().peekable();
    let mut atom = String::new();
    let mut atom_loc = Loc::default();

    fn flush(atom: &mut String, loc: Loc, stack: &mut [(Vec<Sexp>, Loc)], top: &mut Vec<Sexp>) {
        if atom.is_empty() {
            return;
        }
        let a = Sexp::Atom(std::mem::take(atom).to_lowercase(), loc);
        match stack.last_mut() {
            Some((xs, _)) => xs.push(a),
            None => top.push(a),
        }
    }

    while let Some(c) = chars.next() {
        col += 1;
        let here = Loc { line, col };
        match c {
            ';' => {
                flush(&mut atom, atom_loc, &mut stack, &mut top);
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
                line += 1;
                col = 0;
            }
            '(' => {
                flush(&mut atom, atom_loc, &mut stack, &mut top);
                stack.push((vec![], here));
            }
            ')' => {
                flush(&mut atom, atom_loc, &mut stack, &mut top);
                let (xs, loc) =
                    stack.pop().ok_or(SyntaxError { loc: here, message: "unbalanced `)`".into() })?;
                let l = Sexp::List(xs, loc);
                match stack.last_mut() {
                    Some((ys, _)) => ys.push(l),
                    None => top.push(l),
                }
            }
            c if c.is_whitespace() => {
                flush(&mut atom, atom_loc, &mut stack, &mut top);
                if c == '\n' {
                    line += 1;
                    col = 0;
                }
            }
            c => {
                if atom.is_empty() {
                    atom_loc = here;
                }
                atom.push(c);
            }
        }
    }
    flush(&mut atom, atom_loc, &mut stack, &mut top);
    if let Some((_, loc)) = stack.last() {
        return Err(SyntaxError { loc: *loc, message: "unclosed `(`".into() });
    }
    Ok(top)
}
