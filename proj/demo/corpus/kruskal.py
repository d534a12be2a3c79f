class Edge:
    def __init__(self, u, v, weight=1):
        self.u = u
        self.v = v
        self.weight = weight
        self.used = False


def find(parent, i):
    if parent[i] == i:
        return i
    return find(parent, parent[i])


def union(parent, rank, x, y):
    root_x = find(parent, x)
    root_y = find(parent, y)
    if rank[root_x] < rank[root_y]:
        parent[root_x] = root_y
    elif rank[root_x] > rank[root_y]:
        parent[root_y] = root_x
    else:
        parent[root_y] = root_x
        rank[root_x] += 1


class Graph:
    def __init__(self, vertices):
        self.vertices = vertices
        self.edges = []

    def add_edge(self, u, v, weight):
        self.edges.append(Edge(u, v, weight))

    def kruskal(self):
        result = []
        parent = list(range(self.vertices))
        rank = [0] * self.vertices
        edges = sorted(self.edges, key=lambda e: e.weight)
        i = 0
        while len(result) < self.vertices - 1 and i < len(edges):
            edge = edges[i]
            i += 1
            x = find(parent, edge.u)
            y = find(parent, edge.v)
            if x != y:
                edge.used = True
                result.append(edge)
                union(parent, rank, x, y)
        return result


if __name__ == "__main__":
    g = Graph(4)
    g.add_edge(0, 1, 10)
    g.add_edge(0, 2, 6)
    g.add_edge(0, 3, 5)
    g.add_edge(1, 3, 15)
    g.add_edge(2, 3, 4)
    total = 0
    for edge in g.kruskal():
        print(f"{edge.u} -- {edge.v} == {edge.weight}")
        total += edge.weight
    print("Minimum spanning tree weight:", total)
