import { describe, expect, it } from "vitest";

import { buildFormFields, collectValues } from "../src/form.js";
import { fourteenFeatureSchema } from "./helpers.js";

describe("buildFormFields", () => {
  it("renders one field per schema feature", () => {
    const fields = buildFormFields(fourteenFeatureSchema());
    expect(fields).toHaveLength(14);
    expect(new Set(fields.map((f) => f.name)).size).toBe(14);
  });

  it("types controls by feature kind", () => {
    const fields = buildFormFields(fourteenFeatureSchema());
    const byName = Object.fromEntries(fields.map((f) => [f.name, f]));
    expect(byName["wife_salary"].control).toBe("number");
    expect(byName["wife_salary"].unit).toBe("euros");
    expect(byName["children_count"].control).toBe("integer");
    expect(byName["wife_activity_status"].control).toBe("toggle");
    expect(byName["court_seat"].control).toBe("select");
    expect(byName["court_seat"].options).toEqual(["seat_0", "seat_1", "seat_2"]);
  });

  it("marks extra-legal features for the badge", () => {
    const fields = buildFormFields(fourteenFeatureSchema());
    const flagged = fields.filter((f) => f.extraLegal).map((f) => f.name);
    expect(flagged).toEqual(["court_seat"]);
  });
});

describe("collectValues", () => {
  const fields = buildFormFields(fourteenFeatureSchema());

  function baseInputs(): Record<string, string | boolean> {
    const raw: Record<string, string | boolean> = {};
    for (const f of fields) {
      if (f.control === "toggle") raw[f.name] = false;
      else if (f.control === "select") raw[f.name] = "seat_0";
      else if (f.control === "integer") raw[f.name] = "0";
      else raw[f.name] = "0";
    }
    return raw;
  }

  it("parses a complete case", () => {
    const raw = baseInputs();
    raw["wife_salary"] = "1500.5";
    raw["children_count"] = "2";
    raw["wife_activity_status"] = true;
    const { values, errors } = collectValues(fields, raw);
    expect(errors).toEqual([]);
    expect(values["wife_salary"]).toBe(1500.5);
    expect(values["children_count"]).toBe(2);
    expect(values["wife_activity_status"]).toBe(true);
    expect(values["court_seat"]).toBe("seat_0");
  });

  it("empty optional fields become explicit nulls", () => {
    const raw = baseInputs();
    raw["wife_salary"] = "";
    const { values, errors } = collectValues(fields, raw);
    expect(errors).toEqual([]);
    expect(values["wife_salary"]).toBeNull();
  });

  it("empty required fields error by name", () => {
    const raw = baseInputs();
    raw["common_life_years"] = "";
    const { errors } = collectValues(fields, raw);
    expect(errors).toEqual([
      { field: "common_life_years", message: "a value is required" },
    ]);
  });

  it("rejects non-numeric and fractional counts", () => {
    const raw = baseInputs();
    raw["wife_salary"] = "a lot";
    raw["children_count"] = "2.5";
    const { errors } = collectValues(fields, raw);
    expect(errors.map((e) => e.field).sort()).toEqual(
      ["children_count", "wife_salary"],
    );
  });
});
