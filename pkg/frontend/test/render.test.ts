import { describe, expect, it } from "vitest";

import { importanceBars } from "../src/chart.js";
import { buildFormFields } from "../src/form.js";
import { renderChart, renderDelta, renderForm, renderResult } from "../src/render.js";
import { scenarioDelta, type Scenario } from "../src/scenario.js";
import type { ImportanceEntry } from "../src/types.js";
import { deniedResponse, fourteenFeatureSchema, grantedResponse } from "./helpers.js";

describe("renderForm", () => {
  const fields = buildFormFields(fourteenFeatureSchema());

  it("emits one input per feature", () => {
    const html = renderForm(fields);
    expect(html.match(/class="field"/g)).toHaveLength(14);
    expect(html).toContain(`name="wife_salary"`);
    expect(html).toContain(`type="checkbox"`);
  });

  it("categoricals become selects with one option per level", () => {
    const html = renderForm(fields);
    expect(html).toContain(`<select id="f-court_seat"`);
    for (const level of ["seat_0", "seat_1", "seat_2"]) {
      expect(html).toContain(`<option value="${level}"`);
    }
  });

  it("extra-legal features carry a visible badge", () => {
    const html = renderForm(fields);
    const courtRow = html
      .split("\n")
      .find((line) => line.includes(`data-field="court_seat"`))!;
    expect(courtRow).toContain("badge extra-legal");
    const salaryRow = html
      .split("\n")
      .find((line) => line.includes(`data-field="wife_salary"`))!;
    expect(salaryRow).not.toContain("badge");
  });

  it("numeric units are labeled", () => {
    const html = renderForm(fields);
    expect(html).toContain(`<span class="unit">euros</span>`);
    expect(html).toContain(`<span class="unit">years</span>`);
  });

  it("field errors render inline next to the offending input", () => {
    const html = renderForm(fields, {}, [
      { field: "wife_salary", message: "not a number" },
    ]);
    const row = html.split("\n").find((l) => l.includes(`data-field="wife_salary"`))!;
    expect(row).toContain(`<span class="field-error">not a number</span>`);
  });
});

describe("renderResult", () => {
  it("shows exactly the service's probability and adjusted amount", () => {
    const html = renderResult(grantedResponse(), false);
    expect(html).toContain("91.8%");
    expect(html).toContain("€12,483.15");
    expect(html).toContain("1 (grant)");
  });

  it("non-grant renders zero euros with the explanation", () => {
    const html = renderResult(deniedResponse(), false);
    expect(html).toContain(`<dd class="amount">€0</dd>`);
    expect(html).toContain("alimony not granted");
    expect(html).toContain("12.0%");
  });

  it("warnings are listed", () => {
    const html = renderResult(
      grantedResponse({ warnings: ["negative regression output clipped to 0"] }),
      false,
    );
    expect(html).toContain("negative regression output clipped to 0");
  });

  it("pending and empty states", () => {
    expect(renderResult(null, true)).toContain("pending");
    expect(renderResult(null, false)).toContain("no prediction yet");
  });
});

describe("renderDelta", () => {
  it("shows the amount difference between two scenarios", () => {
    const left: Scenario = {
      id: "A", values: { wife_salary: 1500 }, result: grantedResponse(), pending: false,
    };
    const right: Scenario = {
      id: "B", values: { wife_salary: 900 },
      result: grantedResponse({ amount_adjusted: "13000.40", grant_probability: 0.95 }),
      pending: false,
    };
    const html = renderDelta(scenarioDelta(left, right));
    expect(html).toContain("+€517.25");
    expect(html).toContain("wife_salary");
  });

  it("placeholder until both scenarios have results", () => {
    expect(renderDelta(null)).toContain("submit both scenarios");
  });
});

describe("renderChart", () => {
  const entries: ImportanceEntry[] = [
    { feature: "court_seat", score: 107.1, role: "extra_legal" },
    { feature: "capital_once_requested", score: 33.7, role: "legal" },
    { feature: "husband_salary", score: 30.5, role: "legal" },
    { feature: "wife_salary", score: 26.1, role: "legal" },
  ];

  it("renders bars in descending score order", () => {
    const html = renderChart(importanceBars(entries));
    const order = [...html.matchAll(/data-feature="([^"]+)"/g)].map((m) => m[1]);
    expect(order).toEqual([
      "court_seat", "capital_once_requested", "husband_salary", "wife_salary",
    ]);
  });

  it("scales widths to the top score", () => {
    const bars = importanceBars(entries);
    expect(bars[0].widthPct).toBe(100);
    expect(bars[1].widthPct).toBe(Math.round((33.7 / 107.1) * 100));
  });

  it("highlights extra-legal bars", () => {
    const html = renderChart(importanceBars(entries));
    const rows = html.split("\n");
    expect(rows[0]).toContain(`class="bar extra-legal"`);
    expect(rows[1]).toContain(`class="bar"`);
    expect(rows[1]).not.toContain("extra-legal");
  });

  it("caps at top N and handles the empty list", () => {
    expect(importanceBars(entries, 2)).toHaveLength(2);
    expect(renderChart([])).toContain("no importances available");
  });
});
