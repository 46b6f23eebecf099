use crate::error::{Error, Result};

/// Instruction block sent ahead of the text when asking for fact tuples.
pub const EXTRACTION_TEMPLATE: &str = "Your task is to extract knowledge graph tuples from customer reviews and return them as a list. \n\
\n\
Tuples must adhere to the following rules:\n\
1. Tuple are represented as ('subject', 'description')\n\
2. The 'subject' is either the product being reviewed or a feature of the product. It must be one word.\n\
3. The 'description' must be one word, paraphrase it if needed\n\
\n\
### Customer reviews:";

/// Instruction block for the optional summary-generation command.
pub const SUMMARIZATION_TEMPLATE: &str =
    "Your task is to generate a summary review, given a list of customer reviews of a product.\n\
Use the same words the customers use to refer to the product and its characteristics.\n\
The summary review has a limit of 100 words.\n\
\n\
Review list:";

/// Appends `input_text` to `template` on a new line.
pub fn render_prompt(template: &str, input_text: &str) -> Result<String> {
    if template.trim().is_empty() {
        return Err(Error::invalid("prompt template is empty"));
    }
    if input_text.trim().is_empty() {
        return Err(Error::invalid("input text is empty"));
    }
    Ok(format!("{template}\n{input_text}"))
}

pub fn build_extraction_prompt(input_text: &str) -> Result<String> {
    render_prompt(EXTRACTION_TEMPLATE, input_text)
}

/// Joins reviews one per line, in order.
pub fn format_review_list(reviews: &[String]) -> Result<String> {
    let reviews: Vec<&str> = reviews
        .iter()
        .map(|r| r.trim())
        .filter(|r| !r.is_empty())
        .collect();
    if reviews.is_empty() {
        return Err(Error::invalid("no reviews to summarize"));
    }
    Ok(reviews.join("\n"))
}

pub fn build_summarization_prompt(reviews: &[String]) -> Result<String> {
    render_prompt(SUMMARIZATION_TEMPLATE, &format_review_list(reviews)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extraction_prompt_ends_with_input() {
        let p = build_extraction_prompt("The car is fast").unwrap();
        assert!(p.ends_with("### Customer reviews:\nThe car is fast"));
        assert!(
            p.starts_with("Your task is to extract knowledge graph tuples from customer reviews")
        );
        assert!(p.contains("1. Tuple are represented as ('subject', 'description')\n"));
        assert!(p.contains("It must be one word.\n"));
        assert!(p.contains("3. The 'description' must be one word, paraphrase it if needed\n"));
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(
            build_extraction_prompt(""),
            Err(Error::InvalidInput(_))
        ));
        assert!(build_extraction_prompt("  \n").is_err());
    }

    #[test]
    fn multi_line_input_passes_through() {
        let text = "Great shoes.\nThey run \"small\" though\\n";
        let p = build_extraction_prompt(text).unwrap();
        assert!(p.ends_with(text));
    }

    #[test]
    fn summarization_prompt() {
        let p = build_summarization_prompt(&["good".into(), " ".into(), "bad".into()]).unwrap();
        assert!(p.contains("limit of 100 words"));
        assert!(p.ends_with("Review list:\ngood\nbad"));
        assert!(build_summarization_prompt(&[]).is_err());
    }
}
