package org.elasticsearch.cluster.metadata;

import java.util.Objects;

/**
 * Sliced-out reproduction of the index pattern matching hot spot.
 * Indices are dash-separated shard tokens, e.g. "tweets-01-01-2020".
 */
public class IndexNameMatcher {

    private static boolean match(String pattern, String value) {
        return Objects.equals(pattern, value);
    }

    public boolean matchesIndices(String currentIndex, String[] indices, String[][] indicesSplit) {
        for (int i = 0; i < indices.length; i++) {
            if (match(currentIndex, indices[i])) {
                return true;
            }
        }
        return false;
    }
}
