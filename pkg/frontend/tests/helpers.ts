import { readFileSync } from "node:fs";

/** Parse one recorded API response from tests/fixtures. */
export function loadFixture<T>(name: string): T {
  const url = new URL(`./fixtures/${name}`, import.meta.url);
  return JSON.parse(readFileSync(url, "utf8")) as T;
}
