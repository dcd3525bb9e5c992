import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    // The round-trip suite boots the real labeling server in a subprocess.
    testTimeout: 120_000,
    hookTimeout: 120_000,
    // Server-backed tests share one session store; keep files sequential.
    fileParallelism: false,
  },
});
