use super::{Polarity, RuleMatrix};

/// Render a rule as an IF/THEN block.
///
/// Enabled clauses become numbered branches joined by the outer connective;
/// the conditions inside a branch are joined by the inner connective:
///
/// ```text
/// IF  1. age <= 40; OR
///     2. bmi > 30; AND
///        smoker;
/// THEN positive
/// ```
pub fn format_rule(rule: &RuleMatrix) -> String {
    let (outer, inner, empty_clause, empty_rule) = match rule.polarity() {
        Polarity::Dnf => ("OR", "AND", "always", "never"),
        Polarity::Cnf => ("AND", "OR", "never", "always"),
    };
    let branches: Vec<Vec<String>> = (0..rule.n_clauses())
        .filter(|&r| !rule.is_disabled(r))
        .map(|r| {
            let conds: Vec<String> = rule
                .selected(r)
                .map(|j| rule.provenance()[j].describe())
                .collect();
            if conds.is_empty() {
                vec![empty_clause.to_string()]
            } else {
                conds
            }
        })
        .collect();

    if branches.is_empty() {
        return format!("IF {empty_rule} THEN positive\n");
    }

    let mut out = String::new();
    for (b, conds) in branches.iter().enumerate() {
        let number = format!("{}. ", b + 1);
        let last_branch = b + 1 == branches.len();
        for (c, cond) in conds.iter().enumerate() {
            let lead = if b == 0 && c == 0 { "IF  " } else { "    " };
            let num = if c == 0 {
                number.clone()
            } else {
                " ".repeat(number.len())
            };
            let tail = if c + 1 < conds.len() {
                format!("; {inner}")
            } else if !last_branch {
                format!("; {outer}")
            } else {
                ";".to_string()
            };
            out.push_str(&format!("{lead}{num}{cond}{tail}\n"));
        }
    }
    out.push_str("THEN positive\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FeatureOrigin;

    fn provenance() -> Vec<FeatureOrigin> {
        let t = |column: &str, threshold: f64, above: bool| FeatureOrigin::Threshold {
            column: column.into(),
            threshold,
            above,
        };
        vec![
            FeatureOrigin::Pad,
            t("age", 40.0, false),
            t("age", 40.0, true),
            t("bmi", 30.0, false),
            t("bmi", 30.0, true),
        ]
    }

    fn clause(on: &[usize]) -> Vec<bool> {
        let mut w = vec![false; 5];
        for &j in on {
            w[j] = true;
        }
        w
    }

    #[test]
    fn empty_rules() {
        let dnf = RuleMatrix::new(Polarity::Dnf, vec![clause(&[0]); 2], provenance()).unwrap();
        assert_eq!(format_rule(&dnf), "IF never THEN positive\n");
        let cnf = RuleMatrix::new(Polarity::Cnf, vec![clause(&[0])], provenance()).unwrap();
        assert_eq!(format_rule(&cnf), "IF always THEN positive\n");
    }

    #[test]
    fn single_and_clause() {
        let rule = RuleMatrix::new(
            Polarity::Dnf,
            vec![clause(&[0, 3]), clause(&[1, 4])],
            provenance(),
        )
        .unwrap();
        assert_eq!(
            format_rule(&rule),
            "IF  1. age <= 40; AND\n       bmi > 30;\nTHEN positive\n"
        );
    }

    #[test]
    fn two_branch_dnf() {
        let rule = RuleMatrix::new(
            Polarity::Dnf,
            vec![clause(&[2]), clause(&[1, 4])],
            provenance(),
        )
        .unwrap();
        let expected = "\
IF  1. age > 40; OR
    2. age <= 40; AND
       bmi > 30;
THEN positive
";
        assert_eq!(format_rule(&rule), expected);
    }

    #[test]
    fn cnf_connectives() {
        let rule = RuleMatrix::new(
            Polarity::Cnf,
            vec![clause(&[1, 3]), clause(&[])],
            provenance(),
        )
        .unwrap();
        let expected = "\
IF  1. age <= 40; OR
       bmi <= 30; AND
    2. never;
THEN positive
";
        assert_eq!(format_rule(&rule), expected);
    }
}
