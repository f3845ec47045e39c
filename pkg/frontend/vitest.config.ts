import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // the live-service suite spawns the Python backend and walks a full
    // 2000-pair session, so the ceilings are generous
    testTimeout: 300_000,
    hookTimeout: 120_000,
  },
});
