//! Pairwise multiple-choice causal prompt and answer-tag extraction.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multiple-choice outcome for the ordered pair `(a, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Answer {
    /// `a` directly causes `b`.
    A,
    /// `b` directly causes `a`.
    B,
    /// Both directions.
    C,
    /// No direct relationship.
    D,
}

impl Answer {
    pub const ALL: [Answer; 4] = [Answer::A, Answer::B, Answer::C, Answer::D];

    pub fn letter(self) -> char {
        match self {
            Answer::A => 'A',
            Answer::B => 'B',
            Answer::C => 'C',
            Answer::D => 'D',
        }
    }

    /// `(a -> b, b -> a)` edge pattern.
    pub fn edges(self) -> (bool, bool) {
        match self {
            Answer::A => (true, false),
            Answer::B => (false, true),
            Answer::C => (true, true),
            Answer::D => (false, false),
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl std::str::FromStr for Answer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" => Ok(Answer::A),
            "B" => Ok(Answer::B),
            "C" => Ok(Answer::C),
            "D" => Ok(Answer::D),
            other => Err(Error::InvalidLetter(other.to_string())),
        }
    }
}

pub const OPEN_TAG: &str = "<Answer>";
pub const CLOSE_TAG: &str = "</Answer>";

/// Renders the question for the pair. `var_a` fills the first slot.
pub fn render_prompt(var_a: &str, var_b: &str) -> Result<String> {
    let (a, b) = (var_a.trim(), var_b.trim());
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument(
            "variable names must be nonempty".into(),
        ));
    }
    if a == b {
        return Err(Error::InvalidArgument(format!(
            "cannot ask about `{a}` against itself"
        )));
    }
    Ok(format!(
        "Which of the following causal relationship is correct?\n\
         \n\
         A. Changing {a} can directly change {b}.\n\
         B. Changing {b} can directly change {a}.\n\
         C. Both A and B are true.\n\
         D. None of the above. No direct relationship exists.\n\
         \n\
         Let's think step-by-step to make sure that we have the right answer.\n\
         Then provide your final answer within the tags, {OPEN_TAG}A/B/C/D{CLOSE_TAG}"
    ))
}

/// Extracts the letter inside the last complete `<Answer>...</Answer>` pair.
pub fn parse_response(text: &str) -> Result<Answer> {
    let close = text.rfind(CLOSE_TAG).ok_or(Error::MissingTags)?;
    let open = text[..close].rfind(OPEN_TAG).ok_or(Error::MissingTags)?;
    text[open + OPEN_TAG.len()..close].trim().parse()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn option_a_wording() {
        let p = render_prompt("Surface Air Temperature", "Evaporation Rate").unwrap();
        assert!(
            p.contains("Changing Surface Air Temperature can directly change Evaporation Rate.")
        );
        assert!(
            p.contains("Changing Evaporation Rate can directly change Surface Air Temperature.")
        );
        assert!(p.contains("Let's think step-by-step"));
        assert!(p.ends_with("<Answer>A/B/C/D</Answer>"));
    }

    #[test]
    fn each_option_label_once() {
        let p = render_prompt("x", "y").unwrap();
        for label in ["A.", "B.", "C.", "D."] {
            assert_eq!(p.matches(label).count(), 1, "{label}");
        }
        assert!(!p.contains("{α}") && !p.contains("{β}"));
    }

    #[test]
    fn identical_or_empty_names_rejected() {
        assert!(render_prompt("x", "x").is_err());
        assert!(render_prompt("", "x").is_err());
    }

    #[test]
    fn direct_extraction_and_trim() {
        assert_eq!(
            parse_response("...reasoning... <Answer>A</Answer>").unwrap(),
            Answer::A
        );
        assert_eq!(
            parse_response("... <Answer> C </Answer> trailing text").unwrap(),
            Answer::C
        );
        assert_eq!(parse_response("<Answer>\nD\n</Answer>").unwrap(), Answer::D);
    }

    #[test]
    fn last_complete_pair_wins() {
        let t = "maybe <Answer>A</Answer>, on reflection <Answer>B</Answer> and <Answer>C";
        assert_eq!(parse_response(t).unwrap(), Answer::B);
    }

    #[test]
    fn failures() {
        assert!(matches!(
            parse_response("no tags at all"),
            Err(Error::MissingTags)
        ));
        assert!(matches!(
            parse_response("</Answer> <Answer>"),
            Err(Error::MissingTags)
        ));
        assert!(matches!(
            parse_response("<Answer>E</Answer>"),
            Err(Error::InvalidLetter(_))
        ));
        assert!(matches!(
            parse_response("<Answer>A/B/C/D</Answer>"),
            Err(Error::InvalidLetter(_))
        ));
        assert!(matches!(
            parse_response("<Answer></Answer>"),
            Err(Error::InvalidLetter(_))
        ));
    }
}
