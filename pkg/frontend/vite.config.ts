import react from "@vitejs/plugin-react";
import { defineConfig } from "vitest/config";

const API_PATHS = ["/projects", "/batches", "/metrics", "/impact", "/admin"];

export default defineConfig({
  plugins: [react()],
  // the bundle is mounted under /ui, so asset links must stay relative
  base: "./",
  server: {
    proxy: Object.fromEntries(
      API_PATHS.map((p) => [p, "http://127.0.0.1:8340"]),
    ),
  },
  test: {
    environment: "jsdom",
    setupFiles: ["tests/setup.ts"],
    include: ["tests/**/*.test.{ts,tsx}"],
    testTimeout: 15000,
    hookTimeout: 60000,
  },
});
