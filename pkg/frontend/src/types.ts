/** Wire types mirrored from the prediction service. */

export interface FeatureDoc {
  name: string;
  kind: "numeric" | "count" | "boolean" | "categorical";
  role: "legal" | "extra_legal";
  allow_missing: boolean;
  unit?: string | null;
  levels?: string[] | null;
}

export interface SchemaDoc {
  schema_version: number;
  features: FeatureDoc[];
  target_grant: string;
  target_amount: string;
  flag_monthly_payment: string;
  flag_parties_agreed: string;
  model_fingerprint: string;
}

export interface PredictResponse {
  grant_probability: number;
  grant_label: 0 | 1;
  /** Decimal strings: amounts are never re-parsed as floats for display. */
  amount_raw: string;
  amount_adjusted: string;
  model_fingerprint: string;
  warnings: string[];
}

export interface ImportanceEntry {
  feature: string;
  score: number;
  role: "legal" | "extra_legal";
}

export interface ImportancesDoc {
  method: string;
  entries: ImportanceEntry[];
}

export type CaseValues = Record<string, number | boolean | string | null>;

export interface FieldError {
  field: string;
  message: string;
}
