use super::{AttributeSpec, Schema};

/// Schema of the German credit dataset in its categorical ARFF encoding.
///
/// Attributes follow the ARFF file order, which differs from the order the
/// attributes are usually listed in prose. Informal names map as follows:
/// "Own Phone" is `own_telephone`, "No. of dependents" is `num_dependents`,
/// "Property magnitude" is `property_magnitude`, "Other parties" is
/// `other_parties`, "resident since" is `residence_since`.
///
/// Seven attributes are numeric (`duration`, `credit_amount`,
/// `installment_commitment`, `residence_since`, `age`, `existing_credits`,
/// `num_dependents`); the other thirteen are nominal. The class is
/// `{good, bad}`.
pub fn german_credit_schema() -> Schema {
    let attributes = vec![
        AttributeSpec::nominal("checking_status", &["<0", "0<=X<200", ">=200", "no checking"]),
        AttributeSpec::numeric("duration"),
        AttributeSpec::nominal(
            "credit_history",
            &[
                "no credits/all paid",
                "all paid",
                "existing paid",
                "delayed previously",
                "critical/other existing credit",
            ],
        ),
        AttributeSpec::nominal(
            "purpose",
            &[
                "new car",
                "used car",
                "furniture/equipment",
                "radio/tv",
                "domestic appliance",
                "repairs",
                "education",
                "vacation",
                "retraining",
                "business",
                "other",
            ],
        ),
        AttributeSpec::numeric("credit_amount"),
        AttributeSpec::nominal(
            "savings_status",
            &["<100", "100<=X<500", "500<=X<1000", ">=1000", "no known savings"],
        ),
        AttributeSpec::nominal("employment", &["unemployed", "<1", "1<=X<4", "4<=X<7", ">=7"]),
        AttributeSpec::numeric("installment_commitment"),
        AttributeSpec::nominal(
            "personal_status",
            &[
                "male div/sep",
                "female div/dep/mar",
                "male single",
                "male mar/wid",
                "female single",
            ],
        ),
        AttributeSpec::nominal("other_parties", &["none", "co applicant", "guarantor"]),
        AttributeSpec::numeric("residence_since"),
        AttributeSpec::nominal(
            "property_magnitude",
            &["real estate", "life insurance", "car", "no known property"],
        ),
        AttributeSpec::numeric("age"),
        AttributeSpec::nominal("other_payment_plans", &["bank", "stores", "none"]),
        AttributeSpec::nominal("housing", &["rent", "own", "for free"]),
        AttributeSpec::numeric("existing_credits"),
        AttributeSpec::nominal(
            "job",
            &[
                "unemp/unskilled non res",
                "unskilled resident",
                "skilled",
                "high qualif/self emp/mgmt",
            ],
        ),
        AttributeSpec::numeric("num_dependents"),
        AttributeSpec::nominal("own_telephone", &["none", "yes"]),
        AttributeSpec::nominal("foreign_worker", &["yes", "no"]),
    ];
    Schema::new(
        "german_credit",
        attributes,
        AttributeSpec::nominal("class", &["good", "bad"]),
    )
    .expect("built-in schema is valid")
}
