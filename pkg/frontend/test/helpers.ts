import type { FeatureDoc, PredictResponse, SchemaDoc } from "../src/types.js";

/** A 14-feature schema shaped like the service's /schema document. */
export function fourteenFeatureSchema(): SchemaDoc {
  const numeric = (name: string, unit = "euros", allow = false): FeatureDoc => ({
    name, kind: "numeric", role: "legal", allow_missing: allow, unit, levels: null,
  });
  const features: FeatureDoc[] = [
    { name: "wife_activity_status", kind: "boolean", role: "legal",
      allow_missing: false, unit: null, levels: null },
    { name: "husband_activity_status", kind: "boolean", role: "legal",
      allow_missing: false, unit: null, levels: null },
    numeric("husband_salary", "euros", true),
    numeric("husband_retirement_pension"),
    numeric("wife_salary", "euros", true),
    numeric("wife_other_income"),
    { name: "children_count", kind: "count", role: "legal",
      allow_missing: false, unit: null, levels: null },
    { name: "adult_children_count", kind: "count", role: "legal",
      allow_missing: false, unit: null, levels: null },
    numeric("common_life_years", "years"),
    numeric("temporary_support_payment"),
    numeric("capital_once_requested"),
    numeric("capital_cash_requested"),
    numeric("capital_cash_offered"),
    { name: "court_seat", kind: "categorical", role: "extra_legal",
      allow_missing: false, unit: null,
      levels: ["seat_0", "seat_1", "seat_2"] },
  ];
  return {
    schema_version: 1,
    features,
    target_grant: "grant",
    target_amount: "amount",
    flag_monthly_payment: "monthly_payment",
    flag_parties_agreed: "parties_agreed",
    model_fingerprint: "f".repeat(64),
  };
}

export function grantedResponse(overrides: Partial<PredictResponse> = {}): PredictResponse {
  return {
    grant_probability: 0.918,
    grant_label: 1,
    amount_raw: "12483.15",
    amount_adjusted: "12483.15",
    model_fingerprint: "f".repeat(64),
    warnings: [],
    ...overrides,
  };
}

export function deniedResponse(): PredictResponse {
  return grantedResponse({
    grant_probability: 0.12,
    grant_label: 0,
    amount_raw: "9100.5",
    amount_adjusted: "0.0",
  });
}

/** fetch stub returning canned JSON bodies per path. */
export function fetchStub(routes: Record<string, unknown>, status = 200) {
  const calls: { url: string; body?: unknown }[] = [];
  const impl = async (url: string, init?: RequestInit): Promise<Response> => {
    const path = new URL(url, "http://service").pathname;
    calls.push({ url, body: init?.body ? JSON.parse(String(init.body)) : undefined });
    if (!(path in routes)) {
      return new Response(JSON.stringify({ error: "not found" }), { status: 404 });
    }
    const payload = routes[path];
    if (payload instanceof Response) return payload;
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "content-type": "application/json" },
    });
  };
  return { impl, calls };
}
