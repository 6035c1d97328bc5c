import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    include: ["test/**/*.test.ts"],
    testTimeout: 30_000,
    hookTimeout: 60_000,
    // flows share one live server per file; parallel files would race
    // on sessionStorage globals anyway
    fileParallelism: false,
  },
});
