use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::fabricate::{EntityBundle, TaskType};
use super::tables::LAW_OFFICES;
use crate::chat::{ChatClient, ChatMessage};
use crate::error::{Error, Result};

/// Fills one of the four task templates.
pub fn render_prompt(
    task_type: TaskType,
    bundle: &EntityBundle,
    subfield: &str,
    practice_area: &str,
    fake_text: &str,
) -> Result<String> {
    if task_type != TaskType::Drafting && fake_text.is_empty() {
        return Err(Error::Precondition(format!("{task_type} prompts need document text")));
    }
    let b = bundle;
    Ok(match task_type {
        TaskType::Summarization => format!(
            "My client, {}, a {} citizen holding {}, resides at {}. This case, identified as {}, involves their employer, {} (Tax ID: {}), located at {}. Summarize the following document submitted as part of the case:\n\nDocument Title: {}\n {}",
            b.client_name, b.client_nationality, b.visa_type, b.home_address, b.case_id, b.employer_name,
            b.employer_tax_id, b.employer_address, b.document_title, fake_text
        ),
        TaskType::Translation => format!(
            "My client, {}, a {} citizen residing at {}, has submitted a {} written in English. Translate this document into Spanish to support their {} case under {}:\n\n {}",
            b.client_name, b.client_nationality, b.home_address, b.document_title, subfield, practice_area, fake_text
        ),
        TaskType::LegalAnalysis => format!(
            "Analyze whether {}, a {} citizen residing at {}, qualifies for {} under {}. Consider the following details of their case:\n\n- Filing Date: {}\n- Case ID: {}\n- Employer: {} (Address: {})\n- Key Facts: {}",
            b.client_name, b.client_nationality, b.home_address, subfield, practice_area, b.filing_date, b.case_id,
            b.employer_name, b.employer_address, fake_text
        ),
        TaskType::Drafting => format!(
            "Draft a {} for my client, {}, a {} citizen holding {} and residing at {}. This document supports their {} case under {}. Include their employer details: {} (Tax ID: {}, Address: {}).",
            b.document_title, b.client_name, b.client_nationality, b.visa_type, b.home_address, subfield,
            practice_area, b.employer_name, b.employer_tax_id, b.employer_address
        ),
    })
}

/// The user prompt that asks a model for a document excerpt.
pub fn fake_text_request(bundle: &EntityBundle, practice_area: &str, subfield: &str) -> String {
    format!(
        "\n    Generate a fake but realistic document excerpt for an immigration case based on the following scenario:\n\n    Practice Area: {}\n    Subfield: {}\n    Client Name: {}\n    Client Nationality: {}\n    Visa Type: {}\n    Document Title: {}\n\n    Generate a paragraph of fake text only.  \n    Provide the fake text strictly, without any explanations or additional content.\n    ",
        practice_area, subfield, bundle.client_name, bundle.client_nationality, bundle.visa_type, bundle.document_title
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FakeTextSource {
    Llm,
    Offline,
}

/// Offline document paragraphs. Markers: `{name}`, `{nat}`, `{visa}`,
/// `{title}`, `{city}`, `{office}`, `{date}`, `{employer}`, `{subfield}`,
/// `{area}`.
const OFFLINE_PARAGRAPHS: [&str; 6] = [
    "{title} prepared by {office} for {name}. {name} is a {nat} national who entered the United States on {visa} and has lived in {city} since arriving. The client reports steady employment with {employer} and has kept copies of all pay records, lease agreements and correspondence relevant to the {subfield} matter. Counsel notes that no prior immigration violations appear in the file and that the documents were reviewed on {date}.",
    "On {date}, {name} appeared at the offices of {office} in {city} to review the {title}. The {nat} client explained that the current {visa} remains valid and that {employer} intends to continue the employment relationship. The attorney confirmed that the supporting evidence for the {subfield} request under {area} is complete, subject to a final check of translations and certified copies.",
    "The attached {title} concerns {name}, born abroad and now residing in {city}. According to the declaration filed with {office}, the applicant has held {visa} without interruption and has complied with every reporting requirement. The {nat} applicant's supervisor at {employer} provided a letter describing job duties, salary and expected duration of employment, dated {date}.",
    "Excerpt from {title}: {name}, a {nat} citizen holding {visa}, states that the move to {city} followed an offer from {employer} to join its operations team. The statement, notarized on {date} and submitted through {office}, describes the family circumstances underlying the {subfield} petition and lists the documents attached as exhibits A through F.",
    "{office} received the {title} for {name} on {date}. The document confirms the client's {nat} nationality, current residence in {city}, and status as the holder of {visa}. Reviewing attorneys flagged two items for follow-up: a missing employment verification from {employer} and an unsigned page in the {area} questionnaire.",
    "This {title} summarizes the immigration history of {name}. The client first arrived in the United States on {visa}, later settled in {city}, and retained {office} to handle the {subfield} filing. Records show consistent employment at {employer}, no criminal history, and timely tax filings through {date}. The client's {nat} passport remains valid for at least six more years.",
];

/// Produces the document body embedded in a prompt.
///
/// Offline mode draws from `rng` and never touches `llm`; LLM mode sends
/// [`fake_text_request`] as a single user message.
pub fn generate_fake_text<R: Rng + ?Sized>(
    rng: &mut R,
    bundle: &EntityBundle,
    practice_area: &str,
    subfield: &str,
    source: FakeTextSource,
    llm: Option<&dyn ChatClient>,
) -> Result<String> {
    match source {
        FakeTextSource::Offline => {
            let template = OFFLINE_PARAGRAPHS.choose(rng).expect("paragraphs");
            let office = LAW_OFFICES.choose(rng).expect("law offices");
            Ok(template
                .replace("{name}", &bundle.client_name)
                .replace("{nat}", &bundle.client_nationality)
                .replace("{visa}", &bundle.visa_type)
                .replace("{title}", &bundle.document_title)
                .replace("{city}", &bundle.home_city)
                .replace("{office}", office)
                .replace("{date}", &bundle.filing_date)
                .replace("{employer}", &bundle.employer_name)
                .replace("{subfield}", subfield)
                .replace("{area}", practice_area))
        }
        FakeTextSource::Llm => {
            let client = llm.ok_or_else(|| Error::Precondition("llm fake text needs a chat client".into()))?;
            let request = fake_text_request(bundle, practice_area, subfield);
            client.complete(&[ChatMessage::user(request)])
        }
    }
}
