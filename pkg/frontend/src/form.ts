/** Schema-driven form model: one field descriptor per feature.
 *
 * The descriptors say everything the renderer needs (input type, unit label,
 * select options, extra-legal badge); collecting values back validates the
 * raw input strings against the feature kinds before anything is submitted.
 */

import type { CaseValues, FeatureDoc, FieldError, SchemaDoc } from "./types.js";

export type FieldControl = "number" | "integer" | "toggle" | "select";

export interface FormField {
  name: string;
  control: FieldControl;
  unit: string | null;
  options: string[];
  extraLegal: boolean;
  allowMissing: boolean;
}

export function buildFormFields(schema: SchemaDoc): FormField[] {
  return schema.features.map((f: FeatureDoc) => ({
    name: f.name,
    control:
      f.kind === "categorical" ? "select"
      : f.kind === "boolean" ? "toggle"
      : f.kind === "count" ? "integer"
      : "number",
    unit: f.kind === "numeric" ? (f.unit ?? null) : null,
    options: f.kind === "categorical" ? [...(f.levels ?? [])] : [],
    extraLegal: f.role === "extra_legal",
    allowMissing: f.allow_missing,
  }));
}

/** Raw input state as a renderer would hold it: strings and checkbox booleans. */
export type RawInputs = Record<string, string | boolean | undefined>;

export interface CollectResult {
  values: CaseValues;
  errors: FieldError[];
}

export function collectValues(fields: FormField[], raw: RawInputs): CollectResult {
  const values: CaseValues = {};
  const errors: FieldError[] = [];
  for (const field of fields) {
    const input = raw[field.name];
    if (field.control === "toggle") {
      values[field.name] = input === true || input === "true";
      continue;
    }
    const text = typeof input === "string" ? input.trim() : "";
    if (text === "") {
      if (field.allowMissing) {
        values[field.name] = null;
      } else {
        errors.push({ field: field.name, message: "a value is required" });
      }
      continue;
    }
    if (field.control === "select") {
      if (!field.options.includes(text)) {
        errors.push({ field: field.name, message: `unknown option ${text}` });
      } else {
        values[field.name] = text;
      }
      continue;
    }
    const num = Number(text);
    if (!Number.isFinite(num)) {
      errors.push({ field: field.name, message: "not a number" });
      continue;
    }
    if (field.control === "integer" && (!Number.isInteger(num) || num < 0)) {
      errors.push({ field: field.name, message: "must be a non-negative integer" });
      continue;
    }
    values[field.name] = num;
  }
  return { values, errors };
}
